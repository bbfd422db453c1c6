#ifndef WKBSQ_CONNECTION_HPP
#define WKBSQ_CONNECTION_HPP

#include "wkbsq/linalg.hpp"
#include "wkbsq/transseries.hpp"

namespace wkbsq {

using TsMat = Mat<TransseriesR>;

/// hbar-connection hbar*d + Omega(x, hbar, T) dx on a one-dimensional chart
/// with rational-function data. Flatness is automatic in one variable.
struct HbarConnection {
    int rank = 1;
    Truncation tr;
    TsMat omega;
    std::vector<std::complex<double>> pole_set;
    Scalar base_point = Scalar(0);

    /// Classical part Omega|_{hbar=0, T=0} as a rational-function matrix.
    Mat<RatFunc> classical() const;
};

/// Builds a connection from the matrix of one-form coefficients; pole_set is
/// collected from every entry's denominators.
HbarConnection make_connection(TsMat omega, const Truncation& tr,
                               const Scalar& base_point = Scalar(0));

/// Rank-1 module hbar*d - d(alpha): omega = (d alpha/dx).
HbarConnection exponential_module(const RatFunc& alpha, const Truncation& tr,
                                  const Scalar& base_point = Scalar(0));

/// Classical spectral data: characteristic polynomial in xi over the
/// rational functions, distinct sheets with multiplicities, turning points,
/// and numeric primitives along straight paths from the base point.
class SpectralData {
public:
    SpectralData() = default;

    const Polynomial<RatFunc>& char_poly() const { return char_poly_; }
    const Polynomial<RatFunc>& squarefree_part() const { return squarefree_; }
    int rank() const { return rank_; }
    int num_sheets() const { return static_cast<int>(base_values_.size()); }
    const std::vector<int>& multiplicities() const { return mults_; }
    const std::vector<std::complex<double>>& turning_points() const { return turning_points_; }
    std::complex<double> base_point() const { return base_; }
    /// lambda_i(base), the sheet labels.
    const std::vector<std::complex<double>>& base_sheet_values() const { return base_values_; }

    /// Sheet values at x, continued from the base along a straight segment.
    std::vector<std::complex<double>> sheets_at(std::complex<double> x, int steps = 64) const;

    /// Primitive alpha_i(x) = int_base^x lambda_i, along the straight
    /// segment with branch continuation; satisfies d alpha_i = lambda_i dx.
    std::complex<double> primitive(int sheet, std::complex<double> x, int steps = 64) const;

    friend SpectralData characteristic_variety(const HbarConnection& conn);
    friend SpectralData spectral_from_char_poly(const Polynomial<RatFunc>& p,
                                                std::complex<double> base);

private:
    void finish(std::complex<double> base);

    Polynomial<RatFunc> char_poly_;
    Polynomial<RatFunc> squarefree_;
    int rank_ = 0;
    std::vector<int> mults_;
    std::vector<std::complex<double>> turning_points_;
    std::vector<std::complex<double>> base_values_;
    std::complex<double> base_{0, 0};
};

/// det(xi - Omega|_{hbar=0,T=0}) and the derived sheet data.
SpectralData characteristic_variety(const HbarConnection& conn);

/// Spectral data straight from a characteristic polynomial (used by
/// higher-order potentials that never materialize a matrix).
SpectralData spectral_from_char_poly(const Polynomial<RatFunc>& p, std::complex<double> base);

/// P^{-1} (hbar dP/dx + Omega P); P must have an invertible classical part.
HbarConnection gauge_transform(const HbarConnection& conn, const TsMat& P);

/// Inverse of a transseries matrix at truncation (unit classical part).
TsMat ts_mat_inverse(const TsMat& P, const Truncation& tr);

struct BlockDiagonalization {
    std::vector<std::vector<int>> clusters; // base eigenvalue indices per block
    Mat<Scalar> initial_transform;          // constant conjugation (identity if unused)
    TsMat pre_gauge;                        // full initial gauge: constant lift or the
                                            // rational eigenvector matrix
    TsMat Q;                                // I + sum_{r>=1} Q_r hbar^r, block-off-diagonal
    TsMat B;                                // block-diagonal hbar series, B_0 = C_0

    /// gauge_transform(conn, full_gauge()) has off-blocks of order
    /// hbar^{order+1}.
    TsMat full_gauge() const;
};

/// Sibuya reduction: gauge Q with Q^{-1} hbar Q' + Q^{-1} Omega Q = B +
/// O(hbar^{order+1}), blocks labeled by eigenvalue clusters of the classical
/// part at the base point (single-linkage radius gap_tol).
BlockDiagonalization block_diagonalize(const HbarConnection& conn, int order,
                                       double gap_tol = 1e-8);

struct WeakDiagonalization {
    HbarConnection conn; // Omega_0 diagonal + entries of valuation >= c_star
    double c_star;
};

/// Reduces to diagonal-plus-exponentially-small form and computes the decay
/// constant c_star from the off-diagonal valuations and the primitive
/// differences over a disk around the base point.
WeakDiagonalization weak_diagonalize(const HbarConnection& conn, double disk_radius = 0.5);

/// Solution of the rank-1 equation hbar psi' + omega psi = 0:
///   psi = exp(prefactor_exponent / hbar) * exp(log_unit) * subexp
/// with prefactor_exponent = -alpha rational, log_unit rational (the
/// non-rational unit factor exp(int B_0,1) kept as its logarithm), and the
/// subexponential factor an exact transseries normalized to init at base.
struct LinearSolution {
    RatFunc prefactor_exponent;
    RatFunc log_unit;
    TransseriesR subexp;

    /// hbar psi' + omega psi, divided by the prefactors: exact residual in
    /// the transseries ring; zero iff psi solves the equation at truncation.
    TransseriesR residual(const HbarConnection& conn) const;
};

LinearSolution solve_linear(const HbarConnection& conn, const TransseriesR& init,
                            const Scalar& base);

/// Componentwise solutions for a diagonal connection.
std::vector<LinearSolution> solve_linear_diagonal(const HbarConnection& conn,
                                                  const TransseriesR& init,
                                                  const Scalar& base);

/// Solves hbar u' = f(x, u) for a scalar unknown, f polynomial in u with
/// transseries coefficients (f_coeffs[j] multiplies u^j). The formal seed is
/// the hbar-series sum seed[k] hbar^k; grade 0 lifts it, each higher Novikov
/// grade is a linear solve against the classical Jacobian.
TransseriesR graded_picard_solve(const std::vector<TransseriesR>& f_coeffs,
                                 const std::vector<RatFunc>& formal_seed,
                                 const Scalar& base);

/// hbar u' - f(u); the quantity graded_picard_solve drives to zero.
TransseriesR picard_residual(const std::vector<TransseriesR>& f_coeffs,
                             const TransseriesR& u);

// transseries-matrix helpers shared with the sheaf-quantization layer
TsMat ts_mat_identity(int n, const Truncation& tr);
TsMat ts_mat_mul(const TsMat& a, const TsMat& b);
TsMat ts_mat_add(const TsMat& a, const TsMat& b);
TsMat ts_mat_sub(const TsMat& a, const TsMat& b);
bool ts_mat_is_zero(const TsMat& a);

} // namespace wkbsq

#endif
