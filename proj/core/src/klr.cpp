#include "kcml/klr.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "kcml/error.hpp"
#include "kcml/format.hpp"

namespace kcml {
namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid_neg(double score) { // sigmoid(-score), overflow-safe
    if (score >= 0.0) {
        const double e = std::exp(-score);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(score));
}

double clamp_probability(double p) { return std::clamp(p, 1e-300, 1.0 - 1e-16); }

// log-likelihood of scores under {0,1} labels:
// sum h*ln(sigmoid(-s)) + (1-h)*ln(sigmoid(s)).
double log_likelihood(std::span<const double> scores, std::span<const int> labels01) {
    double acc = 0.0;
    for (std::size_t l = 0; l < scores.size(); ++l)
        acc -= labels01[l] == 1 ? softplus(scores[l]) : softplus(-scores[l]);
    return acc;
}

} // namespace

std::vector<int> doublet_labels01(const DoubletSet& doublets) {
    std::vector<int> out;
    out.reserve(doublets.size());
    for (const auto& z : doublets.items) out.push_back(z.label_h == -1 ? 1 : 0);
    return out;
}

double klr_probability(const KlrSolution& solution, std::span<const double> gram_row) {
    if (solution.alphas.size() != gram_row.size())
        throw argument_error("klr_probability: size mismatch");
    const double score = dot(solution.alphas, gram_row) + solution.bias_b;
    return clamp_probability(sigmoid_neg(score));
}

KlrSolution fit_doublet_klr(const GramView& gram, std::span<const int> labels01,
                            const KlrConfig& config) {
    const std::size_t n = gram.size();
    if (labels01.size() != n) throw argument_error("fit_doublet_klr: label size mismatch");
    bool has_zero = false, has_one = false;
    for (int h : labels01) {
        if (h == 0) has_zero = true;
        else if (h == 1) has_one = true;
        else throw argument_error("fit_doublet_klr: labels must be 0 or 1");
    }
    if (!has_zero || !has_one)
        throw degenerate_labels_error("fit_doublet_klr: need both same-class and "
                                      "different-class doublets");

    KlrSolution solution;
    solution.alphas.assign(n, 0.0);
    solution.bias_b = 0.0;

    Vector scores(n, 0.0);
    auto penalized = [&](std::span<const double> alphas, std::span<const double> s) {
        double value = log_likelihood(s, labels01);
        if (config.ridge > 0.0) value -= 0.5 * config.ridge * squared_norm(alphas);
        return value;
    };

    double objective = penalized(solution.alphas, scores);
    double step = 1.0;
    Vector grad(n), direction_scores(n), trial_alphas(n), trial_scores(n);

    for (std::size_t iter = 0; iter < config.max_iter; ++iter) {
        // gradient of the (penalized) likelihood
        Vector residual(n);
        for (std::size_t l = 0; l < n; ++l)
            residual[l] = clamp_probability(sigmoid_neg(scores[l])) - labels01[l];
        double grad_b = 0.0;
        for (std::size_t l = 0; l < n; ++l) grad_b += residual[l];
        for (std::size_t i = 0; i < n; ++i) {
            const GramView::Row row = gram.row(i);
            grad[i] = dot(residual, row.values());
            if (config.ridge > 0.0) grad[i] -= config.ridge * solution.alphas[i];
        }

        double grad_norm = std::abs(grad_b);
        for (double gi : grad) grad_norm = std::max(grad_norm, std::abs(gi));
        solution.gradient_norm = grad_norm;
        if (grad_norm <= config.gradient_tolerance) {
            solution.converged = true;
            break;
        }

        // ascent along the gradient: s(eta) = s + eta * (G grad + grad_b)
        for (std::size_t l = 0; l < n; ++l) {
            const GramView::Row row = gram.row(l);
            direction_scores[l] = dot(grad, row.values()) + grad_b;
        }
        const double slope = squared_norm(grad) + grad_b * grad_b;

        double eta = step;
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving) {
            for (std::size_t i = 0; i < n; ++i)
                trial_alphas[i] = solution.alphas[i] + eta * grad[i];
            for (std::size_t l = 0; l < n; ++l)
                trial_scores[l] = scores[l] + eta * direction_scores[l];
            const double trial = penalized(trial_alphas, trial_scores);
            if (std::isfinite(trial) && trial >= objective + 1e-4 * eta * slope) {
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if (!accepted) break; // numerical floor

        solution.alphas = trial_alphas;
        solution.bias_b += eta * grad_b;
        scores = trial_scores;
        objective = penalized(solution.alphas, scores);
        step = std::min(eta * 2.0, 1e6);
        ++solution.iterations;
        if (config.trace)
            *config.trace << solution.iterations << ' '
                          << format_significant(log_likelihood(scores, labels01), 17) << ' '
                          << format_significant(grad_norm, 17) << ' '
                          << format_significant(eta, 17) << '\n';
    }

    solution.log_likelihood = log_likelihood(scores, labels01);
    return solution;
}

MetricMatrix reconstruct_klr_metric(const KlrSolution& solution, const DoubletSet& doublets) {
    if (solution.alphas.size() != doublets.size())
        throw argument_error("reconstruct_klr_metric: size mismatch");
    MetricMatrix metric;
    metric.m = Matrix(doublets.dim, doublets.dim, 0.0);
    for (std::size_t l = 0; l < doublets.size(); ++l)
        add_scaled_outer(metric.m, solution.alphas[l], doublets.items[l].diff);
    return metric;
}

} // namespace kcml
