#pragma once

#include "mtdiff/data.hpp"
#include "mtdiff/diffusion.hpp"

#include <stdexcept>
#include <vector>

namespace mtdiff {

class TheoryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a requested limit does not exist (spectral radius >= 1).
class UnstableError : public TheoryError {
public:
    using TheoryError::TheoryError;
};

/// First- and second-order moment matrices of the error recursion
///
///   v(n+1) = B_n v(n) + mu (A ⊗ I)^T C_I^T s(n) - mu tau r,
///
/// with v = w - w*. The (LN)^2 x (LN)^2 operator K = B^T ⊗ B^T is never
/// stored; see apply_K.
struct MomentMatrices {
    int n_nodes = 0;
    int filter_length = 0;
    double mu = 0.0;
    double tau = 0.0;
    MatrixXd H;  // blockdiag(R_k), R_k = sum_l c_lk R_{x,l}
    MatrixXd Q;  // 1/2 [diag((P+P^T)1) - (P+P^T)] ⊗ I_L
    MatrixXd B;  // (A ⊗ I)^T [I - mu (H + tau Q)]
    VectorXd r;  // (A ⊗ I)^T Q w*
    MatrixXd G;  // (A ⊗ I)^T C_I^T diag(sigma2_z R_x) C_I (A ⊗ I)
    VectorXd w_star;

    int dim() const { return n_nodes * filter_length; }
};

/// Requires a linear data model (regressors white Gaussian with covariance
/// sigma2_x I_L). Throws TheoryError on dimension mismatch.
MomentMatrices build_moments(const Strategy& strategy, const Scenario& scenario,
                             const Hyperparams& hp);

/// 2 / (max_k lambda_max(R_k) + 2 tau max_k Q_kk); Q_kk is the common
/// diagonal entry of the k-th L x L block of Q.
double step_size_bound(const MatrixXd& H, const MatrixXd& Q, double tau, int filter_length);
double step_size_bound(const MomentMatrices& m);

/// Largest |eigenvalue| of B from a dense eigensolver.
double spectral_radius_B(const MomentMatrices& m);

/// E{v(0..n)} from E{v(n+1)} = B E{v(n)} - mu tau r.
std::vector<VectorXd> mean_recursion(const MomentMatrices& m, const VectorXd& v0, int n);

/// mu tau (B - I)^{-1} r. Throws TheoryError when B - I is singular.
VectorXd bias_limit(const MomentMatrices& m);

/// mat(K vec X) = B^T X B.
MatrixXd apply_K(const MatrixXd& B, const MatrixXd& X);
/// mat(K^T vec X) = B X B^T.
MatrixXd apply_K_transpose(const MatrixXd& B, const MatrixXd& X);

struct SpectralEstimate {
    double radius = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Largest |eigenvalue| of K from restarted Arnoldi on apply_K, started from
/// the identity; `max_iterations` caps the number of operator applications.
/// Never throws; a non-converged estimate carries converged = false and the
/// last value.
SpectralEstimate k_spectral_radius(const MatrixXd& B, double tol = 1e-10,
                                   int max_iterations = 1'000'000);

struct TransientCurve {
    std::vector<double> zeta;  // zeta(0..n_iters), truncated on divergence
    bool diverged = false;
};

/// Theoretical MSD learning curve zeta(n) = (1/N) E|v(n)|^2 for a
/// deterministic start v(0) = v0, propagating
///   S(n)     = mat(K^n vec I)           (S(n+1) = B^T S(n) B)
///   Gamma(n) (matricized row vector)    (Gamma(n+1) = B (Gamma(n) + h(n)) B^T - h(n))
///   h(n)     = r (B E{v(n)})^T
/// and contracting Gamma(n) against vec(I) in the zeta update.
TransientCurve transient_msd(const MomentMatrices& m, const VectorXd& v0, int n_iters);
/// Start from w(0) = 0, i.e. v0 = -w*.
TransientCurve transient_msd(const MomentMatrices& m, int n_iters);

/// Sigma° = (1/N) sum_j (B^T)^j B^j = mat(sigma°), solved by squaring
/// (doubling) iterations on the Stein equation Sigma = I/N + B^T Sigma B.
/// Throws UnstableError when rho(B) >= 1 and TheoryError when the residual
/// exceeds `tol` relative after `max_iterations`.
MatrixXd steady_state_weight(const MomentMatrices& m, double tol = 1e-10, int max_iterations = 200);

/// zeta* = [mu^2 vec(G^T)^T - 2 mu tau ((B v_inf)^T ⊗ r^T)] sigma° + mu^2 tau^2 |r|^2_{sigma°}
double steady_state_msd(const MomentMatrices& m);

}  // namespace mtdiff
