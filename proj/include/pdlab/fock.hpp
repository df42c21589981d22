#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdlab/model.hpp"

namespace pdlab::fock {

inline constexpr std::size_t default_dimension_cap = 200000;

/// C(n, k) as a double-checked 64-bit integer; throws on overflow.
[[nodiscard]] inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        const std::uint64_t num = n - k + i;
        if (r > UINT64_MAX / num) throw std::overflow_error("binomial overflow");
        r = r * num / i;
    }
    return r;
}

/// Hop amplitude sqrt(l(l+1) - m(m+1)) between modes k and k+1, where mode k
/// carries m = k - l. Computed from 4[l(l+1) - m(m+1)], which is an integer.
[[nodiscard]] inline double hop_amplitude(int twice_l, int k) {
    const long L = twice_l;
    const long two_m = 2L * k - L;
    const long four_x = L * (L + 2) - two_m * (two_m + 2);
    return 0.5 * std::sqrt(static_cast<double>(four_x));
}

/// Permutation-symmetric sector of N spins of magnitude l, i.e. N bosons in
/// 2l+1 modes. Occupation vectors are (n_{-l}, ..., n_l) in ascending
/// lexicographic order: (0,...,0,N) comes first and (N,0,...,0) last.
class FockBasis {
public:
    FockBasis(int N, int twice_l, std::size_t dimension_cap = default_dimension_cap)
        : N_(N), twice_l_(twice_l), modes_(twice_l + 1) {
        if (N < 1) throw std::invalid_argument("FockBasis: N must be >= 1");
        if (twice_l < 1) throw std::invalid_argument("FockBasis: twice_l must be >= 1");
        const std::uint64_t dim = binomial(static_cast<std::uint64_t>(N + twice_l), static_cast<std::uint64_t>(twice_l));
        if (dim > dimension_cap)
            throw std::length_error("FockBasis: dimension " + std::to_string(dim) + " exceeds cap " +
                                    std::to_string(dimension_cap));
        dim_ = static_cast<std::size_t>(dim);

        // count_[p][s]: compositions of s into p parts.
        count_.assign(static_cast<std::size_t>(modes_ + 1), std::vector<std::uint64_t>(static_cast<std::size_t>(N + 1), 0));
        for (int p = 1; p <= modes_; ++p)
            for (int s = 0; s <= N; ++s)
                count_[p][s] = binomial(static_cast<std::uint64_t>(s + p - 1), static_cast<std::uint64_t>(p - 1));

        occ_.reserve(dim_ * static_cast<std::size_t>(modes_));
        std::vector<int> v(static_cast<std::size_t>(modes_), 0);
        enumerate(v, 0, N);
        if (occ_.size() != dim_ * static_cast<std::size_t>(modes_))
            throw std::logic_error("FockBasis: enumeration size mismatch");
    }

    [[nodiscard]] int N() const noexcept { return N_; }
    [[nodiscard]] int twice_l() const noexcept { return twice_l_; }
    [[nodiscard]] int modes() const noexcept { return modes_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return dim_; }
    [[nodiscard]] double mode_m(int k) const noexcept { return k - 0.5 * twice_l_; }

    [[nodiscard]] std::span<const int> occupation(std::size_t i) const {
        return {occ_.data() + i * static_cast<std::size_t>(modes_), static_cast<std::size_t>(modes_)};
    }

    /// Position of an occupation vector, or nullopt if it is not in the sector.
    [[nodiscard]] std::optional<std::size_t> index_of(std::span<const int> v) const {
        if (static_cast<int>(v.size()) != modes_) return std::nullopt;
        int remaining = N_;
        for (int x : v) {
            if (x < 0) return std::nullopt;
            remaining -= x;
        }
        if (remaining != 0) return std::nullopt;
        // Rank in ascending lex order: for each position count the vectors
        // that agree on the prefix and have a smaller entry here.
        std::uint64_t rank = 0;
        int left = N_;
        for (int k = 0; k + 1 < modes_; ++k) {
            const int parts_after = modes_ - k - 1;
            for (int x = 0; x < v[static_cast<std::size_t>(k)]; ++x) rank += count_[parts_after][left - x];
            left -= v[static_cast<std::size_t>(k)];
        }
        return static_cast<std::size_t>(rank);
    }

    /// Index of the state with all N bosons in mode m = +l.
    [[nodiscard]] std::size_t fully_up_index() const noexcept { return 0; }

private:
    void enumerate(std::vector<int>& v, int k, int left) {
        if (k == modes_ - 1) {
            v[static_cast<std::size_t>(k)] = left;
            occ_.insert(occ_.end(), v.begin(), v.end());
            return;
        }
        for (int x = 0; x <= left; ++x) {
            v[static_cast<std::size_t>(k)] = x;
            enumerate(v, k + 1, left - x);
        }
    }

    int N_;
    int twice_l_;
    int modes_;
    std::size_t dim_ = 0;
    std::vector<int> occ_;
    std::vector<std::vector<std::uint64_t>> count_;
};

enum class OperatorLabel { free_hamiltonian, hopping, sz, parity };

[[nodiscard]] inline const char* to_string(OperatorLabel l) {
    switch (l) {
    case OperatorLabel::free_hamiltonian: return "H_free";
    case OperatorLabel::hopping: return "Sigma";
    case OperatorLabel::sz: return "Sz";
    case OperatorLabel::parity: return "parity";
    }
    return "?";
}

/// Dense real-symmetric operator on a FockBasis.
struct SectorOperator {
    Eigen::MatrixXd matrix;
    OperatorLabel label;

    [[nodiscard]] double hermiticity_error() const {
        return matrix.size() == 0 ? 0.0 : (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
    }
};

/// Sigma = sum_m sqrt(l(l+1)-m(m+1)) (b_m^dag b_{m+1} + h.c.), i.e. 2 S^x.
[[nodiscard]] inline SectorOperator build_hopping(const FockBasis& basis) {
    const auto dim = static_cast<Eigen::Index>(basis.dimension());
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(dim, dim);
    std::vector<int> w(static_cast<std::size_t>(basis.modes()));
    for (std::size_t i = 0; i < basis.dimension(); ++i) {
        const auto v = basis.occupation(i);
        for (int k = 0; k + 1 < basis.modes(); ++k) {
            const int nk = v[static_cast<std::size_t>(k)];
            const int nk1 = v[static_cast<std::size_t>(k + 1)];
            if (nk1 == 0) continue;
            // b_k^dag b_{k+1}: one boson moves from k+1 down to k.
            std::copy(v.begin(), v.end(), w.begin());
            ++w[static_cast<std::size_t>(k)];
            --w[static_cast<std::size_t>(k + 1)];
            const auto j = basis.index_of(w);
            if (!j) throw std::logic_error("build_hopping: target state missing");
            const double amp = hop_amplitude(basis.twice_l(), k) * std::sqrt(static_cast<double>(nk1) * (nk + 1));
            s(static_cast<Eigen::Index>(*j), static_cast<Eigen::Index>(i)) = amp;
            s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(*j)) = amp;
        }
    }
    return {std::move(s), OperatorLabel::hopping};
}

/// Diagonal of sum_m f(m) n_m.
template <class F>
[[nodiscard]] Eigen::VectorXd mode_diagonal(const FockBasis& basis, F&& f) {
    Eigen::VectorXd d(static_cast<Eigen::Index>(basis.dimension()));
    for (std::size_t i = 0; i < basis.dimension(); ++i) {
        const auto v = basis.occupation(i);
        double acc = 0.0;
        for (int k = 0; k < basis.modes(); ++k) acc += f(basis.mode_m(k)) * v[static_cast<std::size_t>(k)];
        d[static_cast<Eigen::Index>(i)] = acc;
    }
    return d;
}

[[nodiscard]] inline Eigen::VectorXd sz_diagonal(const FockBasis& basis) {
    return mode_diagonal(basis, [](double m) { return m; });
}

[[nodiscard]] inline SectorOperator build_sz(const FockBasis& basis) {
    return {sz_diagonal(basis).asDiagonal().toDenseMatrix(), OperatorLabel::sz};
}

/// H_free = -(J/l) sum_m m^2 n_m - h Sigma.
[[nodiscard]] inline SectorOperator build_free_hamiltonian(const FockBasis& basis, const ModelParams& p,
                                                           const SectorOperator& hopping) {
    Eigen::MatrixXd h = -p.h * hopping.matrix;
    h.diagonal() += (-p.J / p.l()) * mode_diagonal(basis, [](double m) { return m * m; });
    return {std::move(h), OperatorLabel::free_hamiltonian};
}

[[nodiscard]] inline SectorOperator build_free_hamiltonian(const FockBasis& basis, const ModelParams& p) {
    return build_free_hamiltonian(basis, p, build_hopping(basis));
}

/// Q = sum_m b_{-m}^dag b_m, the one-body mirror. It commutes with every
/// one-body operator built from m^2 and Sigma, so it is conserved by the
/// Floquet dynamics; its eigenvalues are N_+ - N_-, the difference between
/// bosons in mirror-even and mirror-odd orbitals, and exp(i pi N_-) is the
/// many-body mirror parity.
[[nodiscard]] inline Eigen::MatrixXd build_mirror_hopping(const FockBasis& basis) {
    const auto dim = static_cast<Eigen::Index>(basis.dimension());
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(dim, dim);
    const int L = basis.twice_l();
    std::vector<int> w(static_cast<std::size_t>(basis.modes()));
    for (std::size_t i = 0; i < basis.dimension(); ++i) {
        const auto v = basis.occupation(i);
        for (int k = 0; k <= L; ++k) {
            const int nk = v[static_cast<std::size_t>(k)];
            if (nk == 0) continue;
            if (2 * k == L) {
                q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += nk;
                continue;
            }
            std::copy(v.begin(), v.end(), w.begin());
            --w[static_cast<std::size_t>(k)];
            ++w[static_cast<std::size_t>(L - k)];
            const auto j = basis.index_of(w);
            if (!j) throw std::logic_error("build_mirror_hopping: target state missing");
            q(static_cast<Eigen::Index>(*j), static_cast<Eigen::Index>(i)) +=
                std::sqrt(static_cast<double>(nk) * (v[static_cast<std::size_t>(L - k)] + 1));
        }
    }
    return q;
}

/// Index of the mirrored occupation vector (n_l, ..., n_{-l}) for each state.
[[nodiscard]] inline std::vector<std::size_t> mirror_map(const FockBasis& basis) {
    std::vector<std::size_t> out(basis.dimension());
    std::vector<int> w(static_cast<std::size_t>(basis.modes()));
    for (std::size_t i = 0; i < basis.dimension(); ++i) {
        const auto v = basis.occupation(i);
        std::reverse_copy(v.begin(), v.end(), w.begin());
        out[i] = *basis.index_of(w);
    }
    return out;
}

/// Mirror m -> -m as a permutation matrix.
[[nodiscard]] inline SectorOperator build_parity(const FockBasis& basis) {
    const auto map = mirror_map(basis);
    const auto dim = static_cast<Eigen::Index>(basis.dimension());
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t i = 0; i < map.size(); ++i) p(static_cast<Eigen::Index>(map[i]), static_cast<Eigen::Index>(i)) = 1.0;
    return {std::move(p), OperatorLabel::parity};
}

/// Orthonormal basis of one mirror-parity eigenspace. Each member is either
/// a mirror-symmetric Fock state (even block only) or the pair
/// (|v> + sign |mirror v>)/sqrt(2).
class ParityBlock {
public:
    struct Member {
        std::size_t first;
        std::size_t second;  // equals first for a mirror-symmetric state
    };

    ParityBlock(std::span<const std::size_t> mirror, int sign) : sign_(sign) {
        if (sign != 1 && sign != -1) throw std::invalid_argument("ParityBlock: sign must be +-1");
        for (std::size_t i = 0; i < mirror.size(); ++i) {
            const std::size_t j = mirror[i];
            if (i == j) {
                if (sign == 1) members_.push_back({i, i});
            } else if (i < j) {
                members_.push_back({i, j});
            }
        }
    }

    [[nodiscard]] int sign() const noexcept { return sign_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return members_.size(); }
    [[nodiscard]] const std::vector<Member>& members() const noexcept { return members_; }

    /// B^T A B for an operator A that commutes with the mirror.
    [[nodiscard]] Eigen::MatrixXd project(const Eigen::MatrixXd& a) const {
        const auto d = static_cast<Eigen::Index>(members_.size());
        Eigen::MatrixXd out(d, d);
        for (Eigen::Index c = 0; c < d; ++c) {
            for (Eigen::Index r = 0; r < d; ++r) out(r, c) = element(a, members_[r], members_[c]);
        }
        return out;
    }

    [[nodiscard]] Eigen::MatrixXcd project(const Eigen::MatrixXcd& a) const {
        const auto d = static_cast<Eigen::Index>(members_.size());
        Eigen::MatrixXcd out(d, d);
        for (Eigen::Index c = 0; c < d; ++c)
            for (Eigen::Index r = 0; r < d; ++r) out(r, c) = element(a, members_[r], members_[c]);
        return out;
    }

    /// B^T x.
    [[nodiscard]] Eigen::VectorXcd restrict(const Eigen::VectorXcd& x) const {
        Eigen::VectorXcd out(static_cast<Eigen::Index>(members_.size()));
        for (std::size_t a = 0; a < members_.size(); ++a) {
            const auto& m = members_[a];
            out[static_cast<Eigen::Index>(a)] =
                m.first == m.second ? x[static_cast<Eigen::Index>(m.first)]
                                    : inv_sqrt2 * (x[static_cast<Eigen::Index>(m.first)] +
                                                   static_cast<double>(sign_) * x[static_cast<Eigen::Index>(m.second)]);
        }
        return out;
    }

    /// x += B y.
    void embed_add(const Eigen::VectorXcd& y, Eigen::VectorXcd& x) const {
        for (std::size_t a = 0; a < members_.size(); ++a) {
            const auto& m = members_[a];
            const auto ya = y[static_cast<Eigen::Index>(a)];
            if (m.first == m.second) {
                x[static_cast<Eigen::Index>(m.first)] += ya;
            } else {
                x[static_cast<Eigen::Index>(m.first)] += inv_sqrt2 * ya;
                x[static_cast<Eigen::Index>(m.second)] += static_cast<double>(sign_) * inv_sqrt2 * ya;
            }
        }
    }

private:
    static constexpr double inv_sqrt2 = 0.70710678118654752440;

    template <class Mat>
    [[nodiscard]] typename Mat::Scalar element(const Mat& a, const Member& r, const Member& c) const {
        using S = typename Mat::Scalar;
        const double s = static_cast<double>(sign_);
        const auto at = [&](std::size_t i, std::size_t j) { return a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); };
        const bool rs = r.first == r.second;
        const bool cs = c.first == c.second;
        if (rs && cs) return S(at(r.first, c.first));
        if (rs) return S(inv_sqrt2 * (at(r.first, c.first) + s * at(r.first, c.second)));
        if (cs) return S(inv_sqrt2 * (at(r.first, c.first) + s * at(r.second, c.first)));
        return S(0.5 * (at(r.first, c.first) + s * at(r.first, c.second) + s * at(r.second, c.first) +
                        at(r.second, c.second)));
    }

    int sign_;
    std::vector<Member> members_;
};

/// Even and odd mirror blocks of a basis.
struct ParityBlocks {
    ParityBlock even;
    ParityBlock odd;

    explicit ParityBlocks(const FockBasis& basis) : ParityBlocks(mirror_map(basis)) {}
    explicit ParityBlocks(const std::vector<std::size_t>& mirror) : even(mirror, 1), odd(mirror, -1) {}
};

/// Recovers the mirror map from a parity permutation matrix.
[[nodiscard]] inline std::vector<std::size_t> mirror_from_parity(const SectorOperator& parity) {
    const auto& p = parity.matrix;
    std::vector<std::size_t> map(static_cast<std::size_t>(p.cols()));
    for (Eigen::Index c = 0; c < p.cols(); ++c) {
        Eigen::Index r = 0;
        p.col(c).cwiseAbs().maxCoeff(&r);
        map[static_cast<std::size_t>(c)] = static_cast<std::size_t>(r);
    }
    return map;
}

/// Row-major CSV dump with a header line "# label=<label> dimension=<d>".
template <class Out>
void dump_csv(Out& out, const SectorOperator& op) {
    char buf[40];
    out << "# label=" << to_string(op.label) << " dimension=" << op.matrix.rows() << "\n";
    for (Eigen::Index r = 0; r < op.matrix.rows(); ++r) {
        for (Eigen::Index c = 0; c < op.matrix.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", op.matrix(r, c));
            out << (c ? "," : "") << buf;
        }
        out << "\n";
    }
}

}  // namespace pdlab::fock
