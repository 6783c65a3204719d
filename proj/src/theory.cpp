#include "mtdiff/theory.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace mtdiff {

namespace {

MatrixXd kron_identity(const MatrixXd& M, int L) {
    MatrixXd out = MatrixXd::Zero(M.rows() * L, M.cols() * L);
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            if (M(i, j) != 0.0) out.block(i * L, j * L, L, L).diagonal().setConstant(M(i, j));
    return out;
}

}  // namespace

MomentMatrices build_moments(const Strategy& strategy, const Scenario& scenario, const Hyperparams& hp) {
    const auto* lin = std::get_if<LinearModelSpec>(&scenario.model);
    if (!lin) throw TheoryError("moment matrices require the linear data model");
    const auto& net = strategy.network;
    const int N = net.n_nodes();
    const int L = net.filter_length();
    if (scenario.truth.n_nodes() != N || scenario.truth.filter_length() != L)
        throw TheoryError("strategy and scenario disagree on network dimensions");
    if (strategy.A.rows() != N || strategy.A.cols() != N || strategy.C.rows() != N || strategy.C.cols() != N ||
        strategy.P.rows() != N || strategy.P.cols() != N)
        throw TheoryError("combination matrices must be N x N");
    lin->check(scenario.truth);

    MomentMatrices m;
    m.n_nodes = N;
    m.filter_length = L;
    m.mu = hp.mu;
    m.tau = hp.tau;
    m.w_star = stacked_optimum(scenario.model, scenario.truth);

    const int dim = N * L;
    m.H = MatrixXd::Zero(dim, dim);
    for (int k = 0; k < N; ++k) {
        double rk = 0.0;
        for (int l = 0; l < N; ++l) rk += strategy.C(l, k) * lin->sigma2_x[static_cast<std::size_t>(l)];
        m.H.block(k * L, k * L, L, L).diagonal().setConstant(rk);
    }

    const MatrixXd S = strategy.P + strategy.P.transpose();
    MatrixXd lap = -S;
    lap.diagonal() += S.rowwise().sum();
    m.Q = kron_identity(0.5 * lap, L);

    const MatrixXd At = kron_identity(strategy.A, L).transpose();
    m.B = At * (MatrixXd::Identity(dim, dim) - hp.mu * (m.H + hp.tau * m.Q));
    m.r = At * (m.Q * m.w_star);

    const MatrixXd CI = kron_identity(strategy.C, L);
    MatrixXd noise = MatrixXd::Zero(dim, dim);
    for (int k = 0; k < N; ++k)
        noise.block(k * L, k * L, L, L).diagonal().setConstant(lin->sigma2_z[static_cast<std::size_t>(k)] *
                                                               lin->sigma2_x[static_cast<std::size_t>(k)]);
    const MatrixXd CA = CI * At.transpose();
    m.G = CA.transpose() * noise * CA;
    return m;
}

double step_size_bound(const MatrixXd& H, const MatrixXd& Q, double tau, int filter_length) {
    const int L = filter_length;
    const auto N = H.rows() / L;
    double lambda_max = 0.0;
    double q_max = 0.0;
    for (Eigen::Index k = 0; k < N; ++k) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(H.block(k * L, k * L, L, L), Eigen::EigenvaluesOnly);
        lambda_max = std::max(lambda_max, eig.eigenvalues().maxCoeff());
        q_max = std::max(q_max, Q(k * L, k * L));
    }
    return 2.0 / (lambda_max + 2.0 * tau * q_max);
}

double step_size_bound(const MomentMatrices& m) { return step_size_bound(m.H, m.Q, m.tau, m.filter_length); }

double spectral_radius_B(const MomentMatrices& m) {
    Eigen::EigenSolver<MatrixXd> eig(m.B, false);
    return eig.eigenvalues().cwiseAbs().maxCoeff();
}

std::vector<VectorXd> mean_recursion(const MomentMatrices& m, const VectorXd& v0, int n) {
    std::vector<VectorXd> out;
    out.reserve(static_cast<std::size_t>(n) + 1);
    out.push_back(v0);
    const VectorXd drift = m.mu * m.tau * m.r;
    for (int i = 0; i < n; ++i) out.push_back(m.B * out.back() - drift);
    return out;
}

VectorXd bias_limit(const MomentMatrices& m) {
    const MatrixXd BmI = m.B - MatrixXd::Identity(m.dim(), m.dim());
    Eigen::FullPivLU<MatrixXd> lu(BmI);
    lu.setThreshold(1e-13);
    if (!lu.isInvertible()) throw TheoryError("B - I is singular: no unique mean limit");
    return m.mu * m.tau * lu.solve(m.r);
}

MatrixXd apply_K(const MatrixXd& B, const MatrixXd& X) { return B.transpose() * X * B; }

MatrixXd apply_K_transpose(const MatrixXd& B, const MatrixXd& X) { return B * X * B.transpose(); }

SpectralEstimate k_spectral_radius(const MatrixXd& B, double tol, int max_iterations) {
    // Restarted Arnoldi on X -> B^T X B with the Frobenius inner product. K
    // keeps symmetric matrices symmetric, so starting from I the search stays
    // in that subspace. Plain power iteration stalls when B has a complex
    // dominant pair (K then has several eigenvalues of equal modulus); the
    // Ritz values of a small Krylov basis resolve such groups.
    const Eigen::Index n = B.rows();
    const int sym_dim = static_cast<int>(n * (n + 1) / 2);
    const int m = std::max(1, std::min(20, sym_dim));
    const double scale = std::max(B.norm() * B.norm(), std::numeric_limits<double>::min());

    SpectralEstimate est;
    MatrixXd X = MatrixXd::Identity(n, n);
    X /= X.norm();
    std::vector<MatrixXd> V;
    while (est.iterations < max_iterations) {
        V.assign(1, X);
        MatrixXd H = MatrixXd::Zero(m + 1, m);
        int k = 0;
        bool breakdown = false;
        for (; k < m && est.iterations < max_iterations; ++k) {
            MatrixXd W = apply_K(B, V[static_cast<std::size_t>(k)]);
            ++est.iterations;
            for (int pass = 0; pass < 2; ++pass)
                for (int i = 0; i <= k; ++i) {
                    const double h = (V[static_cast<std::size_t>(i)].cwiseProduct(W)).sum();
                    H(i, k) += h;
                    W -= h * V[static_cast<std::size_t>(i)];
                }
            H(k + 1, k) = W.norm();
            if (H(k + 1, k) <= 1e-14 * scale) {
                breakdown = true;
                ++k;
                break;
            }
            V.push_back(W / H(k + 1, k));
        }
        if (k == 0) break;
        Eigen::EigenSolver<MatrixXd> eig(H.topLeftCorner(k, k));
        const auto& vals = eig.eigenvalues();
        Eigen::Index top = 0;
        vals.cwiseAbs().maxCoeff(&top);
        est.radius = std::abs(vals(top));
        if (breakdown || est.radius == 0.0) {
            est.converged = true;
            return est;
        }
        const Eigen::VectorXcd y = eig.eigenvectors().col(top);
        const double residual = H(k, k - 1) * std::abs(y(k - 1)) / y.norm();
        if (residual <= tol * est.radius) {
            est.converged = true;
            return est;
        }
        // Restart from the span of the dominant Ritz vectors.
        MatrixXd next = MatrixXd::Zero(n, n);
        for (Eigen::Index j = 0; j < vals.size(); ++j) {
            if (std::abs(vals(j)) < (1.0 - 1e-3) * est.radius) continue;
            const Eigen::VectorXcd yj = eig.eigenvectors().col(j);
            for (int i = 0; i < k; ++i)
                next += (yj(i).real() + yj(i).imag()) * V[static_cast<std::size_t>(i)];
        }
        const double nn = next.norm();
        if (!(nn > 0.0) || !std::isfinite(nn)) break;
        X = next / nn;
    }
    return est;
}

TransientCurve transient_msd(const MomentMatrices& m, const VectorXd& v0, int n_iters) {
    const int dim = m.dim();
    const double inv_n = 1.0 / static_cast<double>(m.n_nodes);
    const double mt = m.mu * m.tau;
    const double mu2 = m.mu * m.mu;
    const MatrixXd& B = m.B;
    const MatrixXd Gt = m.G.transpose();

    TransientCurve out;
    out.zeta.reserve(static_cast<std::size_t>(n_iters) + 1);
    double zeta = inv_n * v0.squaredNorm();
    out.zeta.push_back(zeta);

    MatrixXd S = MatrixXd::Identity(dim, dim);      // mat(K^n vec I)
    MatrixXd Gamma = MatrixXd::Zero(dim, dim);      // mat(Gamma(n)^T)
    VectorXd mean_v = v0;                           // E{v(n)}
    const VectorXd drift = mt * m.r;

    for (int n = 0; n < n_iters; ++n) {
        const MatrixXd KS = apply_K(B, S);
        const VectorXd Bv = B * mean_v;
        // vec(G^T)^T sigma = tr(G S) for sigma = vec(S).
        const double noise = mu2 * (Gt.cwiseProduct(S)).sum();
        const double initial = v0.dot((S - KS) * v0);
        const double reg = mt * mt * m.r.dot(S * m.r);
        // Gamma(n) vec(I) = tr(mat Gamma); h(n) vec(I) = r^T B E{v(n)}.
        const double cross = Gamma.trace() + m.r.dot(Bv);
        zeta += inv_n * (noise - initial + reg - 2.0 * mt * cross);

        const MatrixXd h = m.r * Bv.transpose();
        Gamma = apply_K_transpose(B, Gamma + h) - h;
        S = KS;
        mean_v = Bv - drift;

        if (!std::isfinite(zeta) || S.norm() > kDivergenceNorm) {
            out.diverged = true;
            return out;
        }
        out.zeta.push_back(zeta);
    }
    return out;
}

TransientCurve transient_msd(const MomentMatrices& m, int n_iters) { return transient_msd(m, -m.w_star, n_iters); }

MatrixXd steady_state_weight(const MomentMatrices& m, double tol, int max_iterations) {
    if (spectral_radius_B(m) >= 1.0) throw UnstableError("rho(K) >= 1: no steady state");
    const int dim = m.dim();
    const MatrixXd C0 = MatrixXd::Identity(dim, dim) / static_cast<double>(m.n_nodes);
    // Smith doubling: S_{k+1} = S_k + (B^T)^{2^k} S_k B^{2^k}.
    MatrixXd S = C0;
    MatrixXd Bp = m.B;
    for (int it = 0; it < max_iterations; ++it) {
        const MatrixXd inc = Bp.transpose() * S * Bp;
        S += inc;
        Bp = Bp * Bp;
        if (inc.norm() <= std::numeric_limits<double>::epsilon() * S.norm() || Bp.norm() == 0.0) break;
    }
    const double residual = (S - C0 - apply_K(m.B, S)).norm();
    if (!(residual <= tol * S.norm())) throw TheoryError("steady-state solve did not reach the residual tolerance");
    return S;
}

double steady_state_msd(const MomentMatrices& m) {
    const MatrixXd sigma = steady_state_weight(m);
    const double mt = m.mu * m.tau;
    double zeta = m.mu * m.mu * (m.G.transpose().cwiseProduct(sigma)).sum();
    if (mt != 0.0) {
        const VectorXd v_inf = bias_limit(m);
        const VectorXd Bv = m.B * v_inf;
        zeta += -2.0 * mt * m.r.dot(sigma * Bv) + mt * mt * m.r.dot(sigma * m.r);
    }
    return zeta;
}

}  // namespace mtdiff
