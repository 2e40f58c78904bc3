#include "ssreg/controller.hpp"

#include <algorithm>
#include <cmath>

#include "ssreg/io.hpp"

namespace ssreg {

namespace {

void require(bool cond, const std::string& what) {
    if (!cond) {
        throw ContractViolation(what);
    }
}

// Constants of the ISS decrease inequality that depend on the plant, the
// cost and the certificate but not on the step.
struct IssConstants {
    double c_grad = 0.0;   // coefficient of ||F_c||^2 in alpha3
    double c_state = 0.0;  // coefficient of ||x~||^2 in alpha3
    double a2 = 0.0;       // optimizer-drift gain
    double b23 = 0.0;      // disturbance-increment gain b2 + b3
};

IssConstants iss_constants(const LtiSystem& sys, const StepSizeCertificate& cert, const StateGains& sg, double eta) {
    const double eps = cert.epsilon;
    const double lam = cert.lambda_min_Q;
    const Matrix& P = cert.P;
    const double a1 = cert.a / eps;
    const double n_APH = spectral_norm(sys.A().transpose() * P * sg.H_bar);
    const double b2 = 2.0 * n_APH * n_APH / (eps * lam) + spectral_norm(sg.H_bar.transpose() * P * sg.H_bar);
    const double b3 = 2.0 * eta * eta * spectral_norm(sg.G_bar.transpose() * P * sg.H_bar) / eps;
    IssConstants c;
    c.c_grad = (1.0 - eps) - eta * cert.ell / 2.0 - eta * cert.b;
    c.c_state = (1.0 - eps) * lam - a1;
    c.a2 = cert.ell / (2.0 * eta);
    c.b23 = b2 + b3;
    return c;
}

}  // namespace

Vector controller_step(const Vector& u, const Vector& y, const Matrix& G_hat, const CostModel& cost, double eta) {
    require(u.size() == cost.input_dim() && y.size() == cost.output_dim(), "controller_step: dimension mismatch");
    require(G_hat.rows() == y.size() && G_hat.cols() == u.size(), "controller_step: G_hat must be p x m");
    require(eta >= 0.0 && std::isfinite(eta), "controller_step: step size must be nonnegative");
    return u - eta * (cost.grad_phi(u) + G_hat.transpose() * cost.grad_psi(y));
}

StepSizeCertificate step_size_certificate(const LtiSystem& sys, const CostModel& cost, const Matrix& G, double epsilon,
                                          const std::optional<Matrix>& Q) {
    require(epsilon > 0.0 && epsilon < 1.0, "step_size_certificate: epsilon must lie in (0, 1)");
    require(G.rows() == sys.p() && G.cols() == sys.m(), "step_size_certificate: G must be p x m");
    require(cost.input_dim() == sys.m() && cost.output_dim() == sys.p(),
            "step_size_certificate: cost dimensions do not match the system");
    sys.require_admissible();

    StepSizeCertificate cert;
    cert.epsilon = epsilon;
    const double l_phi = cost.lipschitz_phi();
    const double l_psi = cost.lipschitz_psi();
    const double g_norm = spectral_norm(G);
    const double c_norm = spectral_norm(sys.C());
    cert.ell = l_phi + g_norm * g_norm * l_psi;
    cert.a = 0.5 * l_psi * l_psi * c_norm * c_norm * g_norm * g_norm;
    const double threshold = cert.a / (epsilon * (1.0 - epsilon));

    if (Q) {
        require(Q->rows() == sys.n() && Q->cols() == sys.n(), "step_size_certificate: Q must be n x n");
        cert.Q = *Q;
    } else {
        cert.Q = Matrix::Identity(sys.n(), sys.n()) * (1.01 * threshold);
    }
    cert.lambda_min_Q = lambda_min(cert.Q);
    if (!(cert.lambda_min_Q > threshold)) {
        throw CertificateConditionError("step_size_certificate: lambda_min(Q) = " + format_double(cert.lambda_min_Q) +
                                        " does not exceed a / (eps (1 - eps)) = " + format_double(threshold));
    }
    cert.P = solve_discrete_lyapunov(sys.A(), cert.Q);

    const Matrix G_bar = steady_state_state_gains(sys).G_bar;
    const double n_APG = spectral_norm(sys.A().transpose() * cert.P * G_bar);
    cert.b = 2.0 * n_APG * n_APG / (epsilon * cert.lambda_min_Q) + spectral_norm(G_bar.transpose() * cert.P * G_bar);
    cert.eta_star = (1.0 - epsilon) / (cert.ell / 2.0 + cert.b);
    cert.eta_static = 2.0 / cert.ell;
    return cert;
}

nlohmann::json certificate_to_json(const StepSizeCertificate& cert) {
    return {
        {"epsilon", cert.epsilon},
        {"ell", cert.ell},
        {"a", cert.a},
        {"b", cert.b},
        {"lambda_min_Q", cert.lambda_min_Q},
        {"eta_star", cert.eta_star},
        {"eta_static", cert.eta_static},
        {"Q", matrix_to_json(cert.Q)},
        {"P", matrix_to_json(cert.P)},
    };
}

ClosedLoopRecord run_closed_loop(const LtiSystem& sys, const CostModel& cost, const Matrix& G_hat, double eta,
                                 const Vector& x0, const Vector& u0, const Signal& disturbance, Eigen::Index horizon,
                                 const StepSizeCertificate* certificate) {
    require(horizon >= 1, "run_closed_loop: horizon must be positive");
    require(x0.size() == sys.n() && u0.size() == sys.m(), "run_closed_loop: initial condition dimension mismatch");
    require(disturbance.rows() == sys.r(), "run_closed_loop: disturbance dimension mismatch");
    require(disturbance.cols() >= horizon, "run_closed_loop: disturbance shorter than the horizon");
    require(G_hat.rows() == sys.p() && G_hat.cols() == sys.m(), "run_closed_loop: G_hat must be p x m");
    require(cost.input_dim() == sys.m() && cost.output_dim() == sys.p(), "run_closed_loop: cost dimension mismatch");
    require(eta > 0.0, "run_closed_loop: step size must be positive");

    const SteadyStateGains gains = steady_state_gains(sys);
    const StateGains sg = steady_state_state_gains(sys);

    ClosedLoopRecord rec;
    rec.G_hat = G_hat;
    rec.eta = eta;
    rec.horizon = horizon;
    rec.u.resize(sys.m(), horizon);
    rec.x.resize(sys.n(), horizon);
    rec.y.resize(sys.p(), horizon);
    rec.w.resize(sys.r(), horizon);
    rec.u_star.resize(sys.m(), horizon);
    rec.tracking_error.reserve(static_cast<std::size_t>(horizon));

    Vector x = x0;
    Vector u = u0;
    Eigen::Index recorded = horizon;
    for (Eigen::Index k = 0; k < horizon; ++k) {
        const Vector y = sys.C() * x;
        const Vector w = disturbance.col(k);
        const Vector u_star = cost.minimizer(gains.G, gains.H, w);
        const Vector x_star = sg.G_bar * u_star + sg.H_bar * w;
        rec.u.col(k) = u;
        rec.x.col(k) = x;
        rec.y.col(k) = y;
        rec.w.col(k) = w;
        rec.u_star.col(k) = u_star;
        rec.tracking_error.push_back(std::sqrt((x - x_star).squaredNorm() + (u - u_star).squaredNorm()));

        if (k + 1 == horizon) {
            break;
        }
        const Vector u_next = controller_step(u, y, G_hat, cost, eta);
        x = sys.A() * x + sys.B() * u + sys.E() * w;
        u = u_next;
        if (!u.allFinite() || !x.allFinite() || u.norm() > kDivergenceThreshold) {
            rec.status = LoopStatus::Diverged;
            rec.diverged_at = k + 1;
            recorded = k + 1;
            break;
        }
    }
    if (recorded < horizon) {
        rec.u.conservativeResize(Eigen::NoChange, recorded);
        rec.x.conservativeResize(Eigen::NoChange, recorded);
        rec.y.conservativeResize(Eigen::NoChange, recorded);
        rec.w.conservativeResize(Eigen::NoChange, recorded);
        rec.u_star.conservativeResize(Eigen::NoChange, recorded);
    }
    if (certificate) {
        rec.lyapunov_U = lyapunov_values(sys, cost, gains.G, gains.H, rec, certificate->P);
    }
    return rec;
}

std::vector<double> lyapunov_values(const LtiSystem& sys, const CostModel& cost, const Matrix& G, const Matrix& H,
                                    const ClosedLoopRecord& record, const Matrix& P) {
    require(P.rows() == sys.n() && P.cols() == sys.n(), "lyapunov_values: P must be n x n");
    const StateGains sg = steady_state_state_gains(sys);
    std::vector<double> U;
    U.reserve(static_cast<std::size_t>(record.steps()));
    for (Eigen::Index k = 0; k < record.steps(); ++k) {
        const Vector w = record.w.col(k);
        const Vector u = record.u.col(k);
        const Vector x_tilde = record.x.col(k) - sg.G_bar * u - sg.H_bar * w;
        const double V = cost.suboptimality(G, H, w, u, record.u_star.col(k)) / record.eta;
        U.push_back(V + x_tilde.dot(P * x_tilde));
    }
    return U;
}

std::vector<LyapunovStep> lyapunov_diagnostic(const LtiSystem& sys, const CostModel& cost, const Matrix& G,
                                              const Matrix& H, const ClosedLoopRecord& record,
                                              const StepSizeCertificate& certificate) {
    require(record.u.rows() == sys.m() && record.x.rows() == sys.n(), "lyapunov_diagnostic: record/system mismatch");
    const StateGains sg = steady_state_state_gains(sys);
    const std::vector<double> U = lyapunov_values(sys, cost, G, H, record, certificate.P);
    const IssConstants c = iss_constants(sys, certificate, sg, record.eta);
    const double rate = std::min(c.c_grad, c.c_state);

    std::vector<LyapunovStep> out;
    const Eigen::Index K = record.steps();
    if (K < 2) {
        return out;
    }
    out.reserve(static_cast<std::size_t>(K - 1));
    for (Eigen::Index k = 0; k + 1 < K; ++k) {
        const auto i = static_cast<std::size_t>(k);
        const Vector u = record.u.col(k);
        const Vector w = record.w.col(k);
        const Vector x_tilde = record.x.col(k) - sg.G_bar * u - sg.H_bar * w;
        const Vector F = -(cost.grad_phi(u) + record.G_hat.transpose() * cost.grad_psi(record.y.col(k)));
        const double z2 = F.squaredNorm() + x_tilde.squaredNorm();

        LyapunovStep s;
        s.U = U[i];
        s.delta_U = U[i + 1] - U[i];
        s.norm_dw = (record.w.col(k + 1) - w).norm();
        s.norm_du_star = (record.u_star.col(k + 1) - record.u_star.col(k)).norm();
        s.alpha3 = rate * z2;
        s.sigma = c.a2 * s.norm_du_star * s.norm_du_star + c.b23 * s.norm_dw * s.norm_dw;
        const double slack = 1e-9 * (1.0 + std::abs(U[i]) + std::abs(U[i + 1]));
        s.decrease_ok = s.delta_U <= -s.alpha3 + s.sigma + slack;
        out.push_back(s);
    }
    return out;
}

std::string closed_loop_to_csv(const ClosedLoopRecord& record, const std::vector<LyapunovStep>& diagnostic) {
    std::string out = "k,tracking_error,lyapunov_U,decrease_ok,norm_dw";
    for (Eigen::Index i = 0; i < record.u.rows(); ++i) {
        out += ",u_" + std::to_string(i);
    }
    for (Eigen::Index i = 0; i < record.y.rows(); ++i) {
        out += ",y_" + std::to_string(i);
    }
    out += '\n';
    for (Eigen::Index k = 0; k < record.steps(); ++k) {
        const auto i = static_cast<std::size_t>(k);
        out += std::to_string(k);
        out += ',';
        out += format_double(record.tracking_error[i]);
        out += ',';
        if (i < record.lyapunov_U.size()) {
            out += format_double(record.lyapunov_U[i]);
        }
        out += ',';
        if (i < diagnostic.size()) {
            out += diagnostic[i].decrease_ok ? '1' : '0';
        }
        out += ',';
        if (i < diagnostic.size()) {
            out += format_double(diagnostic[i].norm_dw);
        }
        for (Eigen::Index j = 0; j < record.u.rows(); ++j) {
            out += ',';
            out += format_double(record.u(j, k));
        }
        for (Eigen::Index j = 0; j < record.y.rows(); ++j) {
            out += ',';
            out += format_double(record.y(j, k));
        }
        out += '\n';
    }
    return out;
}

}  // namespace ssreg
