#pragma once

#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "balmat/matrix.hpp"
#include "balmat/schedule.hpp"

namespace balmat {

enum class ModelKind { circuit, random_matching, async_edge };

inline std::string model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::circuit: return "circuit";
        case ModelKind::random_matching: return "random_matching";
        case ModelKind::async_edge: return "async_edge";
    }
    return "?";
}

// Second-largest eigenvalue magnitude, max(|eig_2|, |eig_n|) with eigenvalues
// sorted descending: computed directly for a symmetric matrix, and on the
// symmetrization M*M^T otherwise.
inline double lambda(const MatD& m) {
    if (!is_doubly_stochastic(m, 1e-9))
        throw Error("lambda: matrix is not doubly stochastic");
    int n = m.size();
    if (n == 1) return 0.0;
    bool symmetric = true;
    for (int r = 0; r < n && symmetric; ++r)
        for (int c = r + 1; c < n; ++c)
            if (std::fabs(m(r, c) - m(c, r)) > 1e-12) {
                symmetric = false;
                break;
            }
    Eigen::MatrixXd a(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) a(r, c) = m(r, c);
    Eigen::MatrixXd sym = symmetric ? a : Eigen::MatrixXd(a * a.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym,
                                                          Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw Error("lambda: eigensolver did not converge");
    const auto& ev = solver.eigenvalues();  // ascending
    double second = ev[n - 2];
    double smallest = ev[0];
    return std::max(std::fabs(second), std::fabs(smallest));
}

// Lazy averaging matrix of the graph: 1/(2*max_degree) across each edge,
// the complement on the diagonal.
inline MatD diffusion_matrix(const Graph& g) {
    int n = g.node_count();
    MatD p(n);
    double off = 1.0 / (2.0 * g.max_degree());
    for (const auto& [u, v] : g.edges()) {
        p(u, v) = off;
        p(v, u) = off;
    }
    for (int u = 0; u < n; ++u) p(u, u) = 1.0 - g.degree(u) / (2.0 * g.max_degree());
    return p;
}

// Spectral round bound for continuous balancing, scaled by an explicit
// multiplier (the asymptotic statement hides its constant). For the circuit
// model: multiplier * delta * ln(K*n) / (1 - lambda(period product)). For the
// randomized models: multiplier * ln(K*n) / (p_min * delta * (1 - lambda(P))),
// where the single-edge model passes p_min = 1/|E|.
inline long tau_spectral(ModelKind kind, double K, int n, int delta, double lam,
                         double p_min, double multiplier) {
    if (multiplier <= 0) throw Error("tau_spectral: multiplier must be positive");
    if (K < 1) throw Error("tau_spectral: need K >= 1");
    if (n < 2) throw Error("tau_spectral: need n >= 2");
    if (!(lam >= 0.0 && lam < 1.0))
        throw Error("tau_spectral: need 0 <= lambda < 1 (disconnected or degenerate "
                    "schedule?)");
    double base;
    if (kind == ModelKind::circuit) {
        base = delta * std::log(K * static_cast<double>(n)) / (1.0 - lam);
    } else {
        if (p_min <= 0) throw Error("tau_spectral: need p_min > 0");
        base = std::log(K * static_cast<double>(n)) / (p_min * delta * (1.0 - lam));
    }
    double t = std::ceil(multiplier * base);
    if (!(t > 0)) throw Error("tau_spectral: non-positive round count");
    return static_cast<long>(t);
}

struct SpectralReport {
    double lambda = 0.0;
    std::optional<MatD> diffusion_p;  // set for the randomized models
    double p_min = 0.0;               // 0 when not applicable
    long tau_spectral = 0;
    double constant_multiplier = 0.0;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["lambda"] = lambda;
        if (diffusion_p) {
            nlohmann::json rows = nlohmann::json::array();
            for (int r = 0; r < diffusion_p->size(); ++r) {
                nlohmann::json row = nlohmann::json::array();
                for (int c = 0; c < diffusion_p->size(); ++c)
                    row.push_back((*diffusion_p)(r, c));
                rows.push_back(std::move(row));
            }
            j["diffusion_p"] = std::move(rows);
        } else {
            j["diffusion_p"] = nullptr;
        }
        j["p_min"] = p_min;
        j["tau_spectral"] = tau_spectral;
        j["constant_multiplier"] = constant_multiplier;
        return j;
    }
};

// Full spectral analysis of a model on a graph. For the circuit model the
// analyzed matrix is the one-period product; for the randomized models it is
// the diffusion matrix, with p_min the scheme's exact per-edge bound
// (mutual-proposal scheme) or 1/|E| for the single-edge model. delta is the
// circuit width for the circuit model and the max degree otherwise.
inline SpectralReport spectral_report(const Graph& g, ModelKind kind, double K,
                                      double multiplier,
                                      const CircuitSchedule* circuit = nullptr,
                                      std::optional<double> measured_p_min = {}) {
    SpectralReport rep;
    rep.constant_multiplier = multiplier;
    if (kind == ModelKind::circuit) {
        if (!circuit) throw Error("spectral_report: circuit model needs a schedule");
        MatD period = window_product<double>(*circuit, 1, circuit->width());
        rep.lambda = lambda(period);
        rep.tau_spectral = tau_spectral(kind, K, g.node_count(), circuit->width(),
                                        rep.lambda, 0.0, multiplier);
        return rep;
    }
    MatD p = diffusion_matrix(g);
    rep.lambda = lambda(p);
    if (kind == ModelKind::async_edge) {
        rep.p_min = 1.0 / g.edge_count();
    } else if (measured_p_min) {
        rep.p_min = *measured_p_min;
    } else {
        rep.p_min = RandomMatchingSchedule(g, 0).p_min_exact();
    }
    rep.tau_spectral = tau_spectral(kind, K, g.node_count(), g.max_degree(),
                                    rep.lambda, rep.p_min, multiplier);
    rep.diffusion_p = std::move(p);
    return rep;
}

}  // namespace balmat
