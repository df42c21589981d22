#pragma once

#include "pdlab/analysis.hpp"
#include "pdlab/classical.hpp"
#include "pdlab/config.hpp"
#include "pdlab/dtwa.hpp"
#include "pdlab/floquet.hpp"
#include "pdlab/fock.hpp"
#include "pdlab/gpe.hpp"
#include "pdlab/io.hpp"
#include "pdlab/linalg.hpp"
#include "pdlab/model.hpp"
#include "pdlab/oracle.hpp"
#include "pdlab/parallel.hpp"
#include "pdlab/rng.hpp"

namespace pdlab {
inline constexpr const char* version = "0.1.0";
}
