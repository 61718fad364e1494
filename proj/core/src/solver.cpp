#include "kcml/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "kcml/error.hpp"
#include "kcml/format.hpp"

namespace kcml {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp_box(double value, double upper) { return std::clamp(value, 0.0, upper); }

void validate_config(const SolverConfig& config) {
    if (!(config.C > 0.0)) throw argument_error("solver: C must be positive");
    if (!(config.tolerance > 0.0)) throw argument_error("solver: tolerance must be positive");
}

void check_finite_diagonal(const GramView& gram) {
    for (std::size_t l = 0; l < gram.size(); ++l)
        if (!std::isfinite(gram.diagonal(l)))
            throw numeric_error("solver: non-finite kernel value at diagonal " + std::to_string(l));
}

// W = (sum alpha + alpha . g) / 2 given the dual gradient g.
double objective_from_gradient(std::span<const double> alphas, std::span<const double> g) {
    double sum = 0.0, mixed = 0.0;
    for (std::size_t l = 0; l < alphas.size(); ++l) {
        sum += alphas[l];
        mixed += alphas[l] * g[l];
    }
    return 0.5 * (sum + mixed);
}

std::size_t count_support(std::span<const double> alphas) {
    std::size_t count = 0;
    for (double a : alphas)
        if (a > 0.0) ++count;
    return count;
}

// Doublet SMO state. Gradients are maintained for the active set only;
// deactivated coordinates go stale and are refreshed from scratch when the
// active set is rebuilt (every 10th sweep, at convergence checks, at exit).
class DoubletSmo {
public:
    DoubletSmo(const GramView& gram, std::span<const int> labels, const SolverConfig& config)
        : gram_(gram), labels_(labels), config_(config), n_(gram.size()), alphas_(n_, 0.0),
          hg_(n_, 0.0), fresh_(n_, 1), active_(n_, 1), diagonal_(n_) {
        up_ok_.resize(n_);
        low_ok_.resize(n_);
        for (std::size_t l = 0; l < n_; ++l) {
            diagonal_[l] = gram.diagonal(l);
            hg_[l] = labels_[l]; // h * gradient at alpha = 0
            update_flags(l);
        }
        rebuild_active_list();
        // diagnostics hooks need a full gradient at every step
        lazy_ = !(config.trace || config.on_update);
    }

    DualSolution run();

private:
    struct First {
        std::ptrdiff_t i = -1;
        double up = -kInf;
        double low = kInf; // over I_low, for the stopping quantity
    };

    bool in_up(std::size_t l) const {
        return (labels_[l] > 0 && alphas_[l] < config_.C) || (labels_[l] < 0 && alphas_[l] > 0.0);
    }
    bool in_low(std::size_t l) const {
        return (labels_[l] < 0 && alphas_[l] < config_.C) || (labels_[l] > 0 && alphas_[l] > 0.0);
    }

    // set membership depends only on alpha_l; kept current on every change
    void update_flags(std::size_t l) {
        up_ok_[l] = in_up(l);
        low_ok_[l] = in_low(l);
    }

    First select_first() const {
        First sel;
        for (std::size_t idx = 0; idx < active_list_.size(); ++idx) {
            const std::size_t l = active_list_[idx];
            const double hg = hg_[l];
            if (in_up(l) && hg > sel.up) {
                sel.up = hg;
                sel.i = static_cast<std::ptrdiff_t>(l);
            }
            if (in_low(l)) sel.low = std::min(sel.low, hg);
        }
        return sel;
    }

    // Second index by expected gain (violation^2 / curvature) among violating
    // lower candidates; beats a first-order pair on ill-conditioned Grams.
    std::ptrdiff_t select_second(const GramView::Row& row_i, double diag_i, double up) const {
        std::ptrdiff_t best = -1;
        double best_gain = -1.0;
        for (std::size_t idx = 0; idx < active_list_.size(); ++idx) {
            const std::size_t t = active_list_[idx];
            if (!in_low(t)) continue;
            const double violation = up - hg_[t];
            if (violation <= 0.0) continue;
            const double curvature = std::max(diagonal_[static_cast<std::size_t>(t)] + diag_i -
                                                  2.0 * row_i[t],
                                              1e-12);
            const double gain = violation * violation / curvature;
            if (gain > best_gain) {
                best_gain = gain;
                best = static_cast<std::ptrdiff_t>(t);
            }
        }
        return best;
    }

    void rebuild_active_list() {
        active_list_.clear();
        for (std::size_t l = 0; l < n_; ++l)
            if (active_[l]) active_list_.push_back(l);
    }

    // Recompute stale gradients from the current alphas and activate everyone.
    void refresh_all() {
        for (std::size_t l = 0; l < n_; ++l) {
            if (!fresh_[l]) {
                const GramView::Row row = gram_.row(l);
                double score = 0.0;
                for (std::size_t j = 0; j < n_; ++j)
                    if (alphas_[j] != 0.0) score += alphas_[j] * labels_[j] * row[j];
                hg_[l] = labels_[l] - score; // h * (1 - h * score)
                fresh_[l] = 1;
            }
            active_[l] = 1;
        }
        rebuild_active_list();
    }

    // Park bounded coordinates that sit strictly inside the optimality window.
    void shrink(double up, double low) {
        bool changed = false;
        for (std::size_t idx = 0; idx < active_list_.size(); ++idx) {
            const std::size_t l = active_list_[idx];
            if (alphas_[l] > 0.0 && alphas_[l] < config_.C) continue;
            const double hg = hg_[l];
            const bool parkable = in_up(l) ? hg <= low : hg >= up;
            if (parkable) {
                active_[l] = 0;
                fresh_[l] = 0;
                changed = true;
            }
        }
        if (changed) rebuild_active_list();
    }

    double objective() const {
        double acc = 0.0;
        for (std::size_t l = 0; l < n_; ++l)
            acc += alphas_[l] * (1.0 + labels_[l] * hg_[l]);
        return 0.5 * acc;
    }

    const GramView& gram_;
    std::span<const int> labels_;
    const SolverConfig& config_;
    std::size_t n_;
    Vector alphas_;
    Vector hg_; // h_l * dual gradient, the working quantity everywhere
    std::vector<char> up_ok_;
    std::vector<char> low_ok_;
    std::vector<char> fresh_;
    std::vector<char> active_;
    std::vector<std::size_t> active_list_;
    Vector diagonal_;
    bool lazy_ = true;
};

DualSolution DoubletSmo::run() {
    const double C = config_.C;
    const std::size_t max_updates = config_.max_passes * n_;
    std::size_t updates = 0;
    std::size_t sweep = 0;
    std::size_t stalls = 0;
    bool shrunk = false;
    bool carried_valid = false;
    First carried; // selection folded into the previous gradient update
    double violation = kInf;

    while (updates < max_updates) {
        const First sel = carried_valid ? carried : select_first();
        carried_valid = false;
        if (sel.i < 0 || sel.low == kInf || sel.up - sel.low <= config_.tolerance) {
            if (shrunk) { // confirm optimality on the full set
                refresh_all();
                shrunk = false;
                continue;
            }
            violation = (sel.i < 0 || sel.low == kInf) ? 0.0
                                                       : std::max(0.0, sel.up - sel.low);
            break;
        }

        const std::size_t i = static_cast<std::size_t>(sel.i);
        const GramView::Row row_i = gram_.row(i);
        const std::ptrdiff_t j_sel = select_second(row_i, diagonal_[i], sel.up);
        if (j_sel < 0) { // no violating partner in the active set
            if (shrunk) {
                refresh_all();
                shrunk = false;
                continue;
            }
            violation = std::max(0.0, sel.up - sel.low);
            break;
        }
        const std::size_t j = static_cast<std::size_t>(j_sel);
        const GramView::Row row_j = gram_.row(j);
        const int hi = labels_[i];
        const int hj = labels_[j];

        const double slope = sel.up - hg_[j];
        const double curvature = row_i[i] + row_j[j] - 2.0 * row_i[j];
        const double step_limit_i = hi > 0 ? C - alphas_[i] : alphas_[i];
        const double step_limit_j = hj > 0 ? alphas_[j] : C - alphas_[j];
        const double max_step = std::min(step_limit_i, step_limit_j);
        const double step = curvature > 0.0 ? std::min(max_step, slope / curvature) : max_step;

        const double conserved = hi * alphas_[i] + hj * alphas_[j];
        const double new_i = clamp_box(alphas_[i] + hi * step, C);
        const double new_j = clamp_box(hj * (conserved - hi * new_i), C);
        const double delta_i = new_i - alphas_[i];
        const double delta_j = new_j - alphas_[j];
        if (delta_i == 0.0 && delta_j == 0.0) {
            if (++stalls > 2) { // numerical floor; stop with the honest violation
                violation = std::max(0.0, slope);
                break;
            }
            refresh_all();
            shrunk = false;
            continue;
        }
        stalls = 0;
        alphas_[i] = new_i;
        alphas_[j] = new_j;
        update_flags(i);
        update_flags(j);
        const double wi = hi * delta_i;
        const double wj = hj * delta_j;
        // maintain h*gradient and pick the next first index in the same pass
        First next;
        if (lazy_) {
            for (std::size_t idx = 0; idx < active_list_.size(); ++idx) {
                const std::size_t l = active_list_[idx];
                const double hg = hg_[l] - (wi * row_i[l] + wj * row_j[l]);
                hg_[l] = hg;
                if (up_ok_[l] && hg > next.up) {
                    next.up = hg;
                    next.i = static_cast<std::ptrdiff_t>(l);
                }
                if (low_ok_[l]) next.low = std::min(next.low, hg);
            }
        } else {
            for (std::size_t l = 0; l < n_; ++l) {
                const double hg = hg_[l] - (wi * row_i[l] + wj * row_j[l]);
                hg_[l] = hg;
                if (up_ok_[l] && hg > next.up) {
                    next.up = hg;
                    next.i = static_cast<std::ptrdiff_t>(l);
                }
                if (low_ok_[l]) next.low = std::min(next.low, hg);
            }
        }
        carried = next;
        carried_valid = true;
        ++updates;
        if (config_.on_update) config_.on_update(objective());

        if (updates % n_ == 0) {
            ++sweep;
            if (config_.trace) {
                First full = select_first();
                *config_.trace << sweep << ' '
                               << format_significant(objective(), 17) << ' '
                               << format_significant(std::max(0.0, full.up - full.low), 17)
                               << '\n';
            }
            if (!lazy_) continue;
            if (sweep % 10 == 0) {
                refresh_all();
                shrunk = false;
                carried_valid = false;
            } else {
                shrink(carried.up, carried.low);
                shrunk = shrunk || active_list_.size() < n_;
                carried_valid = false; // membership changed under the selection
            }
        }
    }

    refresh_all();
    if (violation == kInf) { // update budget exhausted
        First full = select_first();
        violation =
            (full.i < 0 || full.low == kInf) ? 0.0 : std::max(0.0, full.up - full.low);
    }

    double bias = 0.0;
    {
        double bias_sum = 0.0;
        std::size_t free_count = 0;
        for (std::size_t l = 0; l < n_; ++l) {
            if (alphas_[l] > 0.0 && alphas_[l] < C) {
                bias_sum += hg_[l];
                ++free_count;
            }
        }
        if (free_count > 0) {
            bias = bias_sum / static_cast<double>(free_count);
        } else { // midpoint of the KKT-feasible interval from bounded vectors
            double up = -kInf, low = kInf;
            for (std::size_t l = 0; l < n_; ++l) {
                if (in_up(l)) up = std::max(up, hg_[l]);
                if (in_low(l)) low = std::min(low, hg_[l]);
            }
            bias = 0.5 * ((up == -kInf ? 0.0 : up) + (low == kInf ? 0.0 : low));
        }
    }

    DualSolution solution;
    solution.bias_b = bias;
    solution.kkt_violation = violation;
    solution.iterations = updates;
    solution.dual_objective = objective();
    solution.support_count = count_support(alphas_);
    solution.alphas = std::move(alphas_);
    return solution;
}

} // namespace

DualSolution solve_doublet_svm(const GramView& gram, std::span<const int> labels_h,
                               const SolverConfig& config) {
    validate_config(config);
    const std::size_t n = gram.size();
    if (n < 2) throw argument_error("solve_doublet_svm: need at least two doublets");
    if (labels_h.size() != n) throw argument_error("solve_doublet_svm: label size mismatch");
    bool has_pos = false, has_neg = false;
    for (int h : labels_h) {
        if (h == 1) has_pos = true;
        else if (h == -1) has_neg = true;
        else throw argument_error("solve_doublet_svm: labels must be +1 or -1");
    }
    if (!has_pos || !has_neg)
        throw degenerate_labels_error("solve_doublet_svm: need both +1 and -1 doublets");
    check_finite_diagonal(gram);

    DoubletSmo smo(gram, labels_h, config);
    DualSolution solution = smo.run();
    if (!std::isfinite(solution.dual_objective))
        throw numeric_error("solve_doublet_svm: non-finite kernel value encountered");
    return solution;
}

DualSolution solve_triplet_svm(const GramView& gram, const SolverConfig& config) {
    validate_config(config);
    const std::size_t n = gram.size();
    if (n < 1) throw argument_error("solve_triplet_svm: empty constraint set");
    check_finite_diagonal(gram);

    const double C = config.C;
    Vector alphas(n, 0.0);
    Vector g(n, 1.0);
    std::vector<char> pinned(n, 0);
    for (std::size_t l = 0; l < n; ++l) pinned[l] = gram.diagonal(l) == 0.0;
    std::vector<char> active(n, 1);
    std::vector<char> fresh(n, 1);
    const bool lazy = !(config.trace || config.on_update);

    auto refresh_all = [&] {
        for (std::size_t l = 0; l < n; ++l) {
            if (pinned[l]) continue;
            if (!fresh[l]) {
                const GramView::Row row = gram.row(l);
                double score = 0.0;
                for (std::size_t j = 0; j < n; ++j)
                    if (alphas[j] != 0.0) score += alphas[j] * row[j];
                g[l] = 1.0 - score;
                fresh[l] = 1;
            }
            active[l] = 1;
        }
    };
    auto local_violation = [&](std::size_t l) {
        if (alphas[l] <= 0.0) return std::max(0.0, g[l]);
        if (alphas[l] >= C) return std::max(0.0, -g[l]);
        return std::abs(g[l]);
    };

    const std::size_t max_updates = config.max_passes * n;
    std::size_t updates = 0;
    double violation = kInf;

    for (std::size_t sweep = 1; sweep <= config.max_passes && updates < max_updates; ++sweep) {
        if (lazy && sweep % 10 == 0) refresh_all();
        bool moved = false;
        for (std::size_t l = 0; l < n && updates < max_updates; ++l) {
            if (pinned[l] || !active[l]) continue;
            const double target = clamp_box(alphas[l] + g[l] / gram.diagonal(l), C);
            const double delta = target - alphas[l];
            if (delta == 0.0) continue;
            const GramView::Row row = gram.row(l);
            if (lazy) {
                for (std::size_t m = 0; m < n; ++m) {
                    if (active[m]) g[m] -= delta * row[m];
                }
            } else {
                for (std::size_t m = 0; m < n; ++m) g[m] -= delta * row[m];
            }
            alphas[l] = target;
            moved = true;
            ++updates;
            if (config.on_update) config.on_update(objective_from_gradient(alphas, g));
        }

        // violation over the refreshed full set decides convergence
        bool full_view = true;
        for (std::size_t l = 0; l < n; ++l)
            if (!active[l] && !pinned[l]) full_view = false;
        violation = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            if (pinned[l] || !active[l]) continue;
            if (!std::isfinite(g[l]))
                throw numeric_error("solve_triplet_svm: non-finite kernel value encountered");
            violation = std::max(violation, local_violation(l));
        }
        if (config.trace)
            *config.trace << sweep << ' '
                          << format_significant(objective_from_gradient(alphas, g), 17) << ' '
                          << format_significant(violation, 17) << '\n';
        if (violation <= config.tolerance) {
            if (full_view) break;
            refresh_all(); // confirm on the full set
            violation = 0.0;
            for (std::size_t l = 0; l < n; ++l)
                if (!pinned[l]) violation = std::max(violation, local_violation(l));
            if (violation <= config.tolerance) break;
            continue;
        }
        if (!moved) {
            if (full_view) break; // numerical floor
            refresh_all();
            continue;
        }
        if (lazy) {
            for (std::size_t l = 0; l < n; ++l) {
                if (pinned[l] || !active[l]) continue;
                if ((alphas[l] <= 0.0 && g[l] <= 0.0) || (alphas[l] >= C && g[l] >= 0.0)) {
                    active[l] = 0;
                    fresh[l] = 0;
                }
            }
        }
    }

    refresh_all();
    double final_violation = 0.0;
    for (std::size_t l = 0; l < n; ++l)
        if (!pinned[l]) final_violation = std::max(final_violation, local_violation(l));

    DualSolution solution;
    solution.alphas = std::move(alphas);
    solution.bias_b = 0.0;
    solution.kkt_violation = final_violation;
    solution.iterations = updates;
    solution.dual_objective = objective_from_gradient(solution.alphas, g);
    solution.support_count = count_support(solution.alphas);
    if (!std::isfinite(solution.dual_objective))
        throw numeric_error("solve_triplet_svm: non-finite kernel value encountered");
    return solution;
}

double dual_objective(std::span<const double> alphas, const GramView& gram,
                      std::span<const int> labels_h) {
    const std::size_t n = gram.size();
    if (alphas.size() != n) throw argument_error("dual_objective: size mismatch");
    if (!labels_h.empty() && labels_h.size() != n)
        throw argument_error("dual_objective: label size mismatch");

    double linear = 0.0, quadratic = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        linear += alphas[i];
        if (alphas[i] == 0.0) continue;
        const GramView::Row row = gram.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double term = alphas[j] * row[j];
            if (!labels_h.empty()) term *= labels_h[i] * labels_h[j];
            acc += term;
        }
        quadratic += alphas[i] * acc;
    }
    return linear - 0.5 * quadratic;
}

KktReport kkt_report(const DualSolution& solution, const GramView& gram,
                     std::span<const int> labels_h, double C) {
    const std::size_t n = gram.size();
    if (solution.alphas.size() != n) throw argument_error("kkt_report: size mismatch");
    const bool doublet = !labels_h.empty();
    if (doublet && labels_h.size() != n) throw argument_error("kkt_report: label size mismatch");

    KktReport report;
    report.gradients.assign(n, 0.0);
    report.violations.assign(n, 0.0);

    for (std::size_t l = 0; l < n; ++l) {
        const GramView::Row row = gram.row(l);
        double score = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double term = solution.alphas[j] * row[j];
            if (doublet) term *= labels_h[j];
            score += term;
        }
        report.gradients[l] = doublet ? 1.0 - labels_h[l] * score : 1.0 - score;
    }

    double max_violation = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        const double box = std::max({0.0, -solution.alphas[l], solution.alphas[l] - C});
        report.violations[l] = box;
        max_violation = std::max(max_violation, box);
    }

    if (doublet) {
        double equality = 0.0;
        for (std::size_t l = 0; l < n; ++l) equality += solution.alphas[l] * labels_h[l];
        max_violation = std::max(max_violation, std::abs(equality));

        double up = -kInf, low = kInf;
        for (std::size_t l = 0; l < n; ++l) {
            const double hg = labels_h[l] * report.gradients[l];
            const bool in_up = (labels_h[l] > 0 && solution.alphas[l] < C) ||
                               (labels_h[l] < 0 && solution.alphas[l] > 0.0);
            const bool in_low = (labels_h[l] < 0 && solution.alphas[l] < C) ||
                                (labels_h[l] > 0 && solution.alphas[l] > 0.0);
            if (in_up) up = std::max(up, hg);
            if (in_low) low = std::min(low, hg);
        }
        if (up > -kInf && low < kInf) max_violation = std::max(max_violation, up - low);
        for (std::size_t l = 0; l < n; ++l) {
            const double hg = labels_h[l] * report.gradients[l];
            double stat;
            if (solution.alphas[l] > 0.0 && solution.alphas[l] < C)
                stat = std::abs(hg - solution.bias_b);
            else if ((labels_h[l] > 0 && solution.alphas[l] <= 0.0) ||
                     (labels_h[l] < 0 && solution.alphas[l] >= C))
                stat = std::max(0.0, hg - solution.bias_b);
            else
                stat = std::max(0.0, solution.bias_b - hg);
            report.violations[l] = std::max(report.violations[l], stat);
        }
    } else {
        for (std::size_t l = 0; l < n; ++l) {
            if (gram.diagonal(l) == 0.0) continue; // vacuous constraint
            double stat;
            if (solution.alphas[l] <= 0.0)
                stat = std::max(0.0, report.gradients[l]);
            else if (solution.alphas[l] >= C)
                stat = std::max(0.0, -report.gradients[l]);
            else
                stat = std::abs(report.gradients[l]);
            report.violations[l] = std::max(report.violations[l], stat);
            max_violation = std::max(max_violation, stat);
        }
    }

    report.max_violation = max_violation;
    return report;
}

} // namespace kcml
