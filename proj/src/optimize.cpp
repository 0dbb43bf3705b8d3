#include "floatelast/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace floatelast {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void apply_constraints(DeformationField& y, const Constraints& c) {
    const int dim = y.dim;
    for (std::size_t m = 0; m < c.clamped_nodes.size(); ++m)
        for (int k = 0; k < dim; ++k)
            y.x[std::size_t(c.clamped_nodes[m]) * dim + k] = c.clamped_targets[m * dim + k];
    for (std::size_t m = 0; m < c.inextensible_nodes.size(); ++m) {
        Eigen::Map<const Eigen::VectorXd> t(c.inextensible_targets.data() + m * dim, dim);
        Vec v = y.node(c.inextensible_nodes[m]) - t;
        double n = v.norm();
        if (n > c.lambda)
            y.set_node(c.inextensible_nodes[m], Vec(t + v * (c.lambda / n)));
    }
}

// Gradient with constrained directions removed: clamped dofs zeroed, active
// inextensible nodes lose their outward radial component.
int mask_gradient(Eigen::VectorXd& g, const DeformationField& y, const Constraints& c) {
    const int dim = y.dim;
    for (int i : c.clamped_nodes)
        g.segment(std::size_t(i) * dim, dim).setZero();
    int active = 0;
    for (std::size_t m = 0; m < c.inextensible_nodes.size(); ++m) {
        Eigen::Map<const Eigen::VectorXd> t(c.inextensible_targets.data() + m * dim, dim);
        Vec v = y.node(c.inextensible_nodes[m]) - t;
        double n = v.norm();
        if (n < c.lambda * (1.0 - 1e-12))
            continue;
        ++active;
        Vec nrm = v / n;
        auto seg = g.segment(std::size_t(c.inextensible_nodes[m]) * dim, dim);
        double radial = nrm.dot(seg);
        if (radial < 0) // step -g would leave the ball
            seg -= radial * nrm;
    }
    return active;
}

} // namespace

void SolveOptions::validate() const {
    if (!(grad_tol > 0))
        throw std::runtime_error("solver: grad_tol must be > 0");
    if (!(backtrack > 0 && backtrack < 1))
        throw std::runtime_error("solver: backtracking factor must lie in (0,1)");
    if (!(armijo > 0 && armijo < 1))
        throw std::runtime_error("solver: sufficient-decrease constant must lie in (0,1)");
    if (!(sink_depth_factor >= 2))
        throw std::runtime_error("solver: sink_depth_factor must be >= 2");
    if (max_iters < 1)
        throw std::runtime_error("solver: max_iters must be >= 1");
}

const char* to_string(SolveStatus s) {
    switch (s) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::UnboundedDescent: return "UnboundedDescent";
    case SolveStatus::MaxIters: return "MaxIters";
    case SolveStatus::LineSearchFail: return "LineSearchFail";
    }
    return "?";
}

Constraints Constraints::from_anchor(const AnchorSpec& anchor, const ReferenceMesh& mesh,
                                     const DeformationField& y0) {
    Constraints c;
    if (anchor.kind == AnchorSpec::Kind::Clamped) {
        c.clamped_nodes = anchor.nodes;
        for (int i : anchor.nodes) {
            Vec t = anchor.target(mesh.node_pos(i));
            for (int k = 0; k < mesh.dim; ++k)
                c.clamped_targets.push_back(t[k]);
        }
    } else if (anchor.kind == AnchorSpec::Kind::Inextensible) {
        c.inextensible_nodes = anchor.nodes;
        c.lambda = anchor.lambda;
        for (int i : anchor.nodes) {
            Vec t = anchor.target(mesh.node_pos(i));
            for (int k = 0; k < mesh.dim; ++k)
                c.inextensible_targets.push_back(t[k]);
        }
    }
    (void)y0;
    return c;
}

SolveResult minimize(Objective& obj, const DeformationField& y0, const SolveOptions& opts,
                     const Constraints& constraints, const TraceFn& trace) {
    opts.validate();
    SolveResult res;
    res.y = y0;
    apply_constraints(res.y, constraints);

    double f = obj.value(res.y);
    if (!std::isfinite(f))
        throw std::runtime_error("minimize: initial state has non-finite energy");

    const Eigen::Index n = res.y.x.size();
    Eigen::VectorXd g(n), g_new(n);
    obj.gradient(res.y, g);
    res.inextensible_active_nodes = mask_gradient(g, res.y, constraints);

    // L-BFGS memory.
    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;
    const bool use_lbfgs = opts.strategy == SolveOptions::Strategy::Lbfgs
                        && constraints.inextensible_nodes.empty();

    // Scale for the very first trial step. A displacement measure of the
    // current state keeps the step size geometry-aware.
    double scale = 0;
    for (int i = 0; i < res.y.n_nodes(); ++i)
        scale = std::max(scale, res.y.node(i).cwiseAbs().maxCoeff());
    scale = std::max(scale, 1e-12);
    double alpha_prev = -1;

    for (int iter = 0; iter < opts.max_iters; ++iter) {
        res.iterations = iter;
        res.grad_norm = g.norm();
        if (trace)
            trace(iter, obj.breakdown(res.y), res.grad_norm);
        if (res.grad_norm <= opts.grad_tol) {
            res.status = SolveStatus::Converged;
            res.energy = f;
            return res;
        }
        if (obj.unbounded_descent(res.y)) {
            res.status = SolveStatus::UnboundedDescent;
            res.energy = f;
            return res;
        }

        // Search direction.
        Eigen::VectorXd p;
        if (use_lbfgs && !s_hist.empty()) {
            p = g;
            std::vector<double> a(s_hist.size());
            for (int i = int(s_hist.size()) - 1; i >= 0; --i) {
                a[i] = rho_hist[i] * s_hist[i].dot(p);
                p -= a[i] * y_hist[i];
            }
            double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            p *= gamma;
            for (std::size_t i = 0; i < s_hist.size(); ++i) {
                double b = rho_hist[i] * y_hist[i].dot(p);
                p += (a[i] - b) * s_hist[i];
            }
            p = -p;
            if (p.dot(g) >= -1e-12 * p.norm() * res.grad_norm) {
                p = -g; // not a descent direction; reset
                s_hist.clear();
                y_hist.clear();
                rho_hist.clear();
            }
        } else {
            p = -g;
        }

        double slope = p.dot(g); // < 0
        double alpha;
        if (use_lbfgs && !s_hist.empty())
            alpha = 1.0;
        else if (alpha_prev > 0)
            alpha = 2.0 * alpha_prev;
        else
            alpha = opts.initial_step * scale / std::max(p.norm() / std::sqrt(double(n)), 1e-30);

        // Backtracking with optional expansion when the first trial already
        // satisfies the sufficient decrease (speeds up runaway descent).
        DeformationField y_try = res.y;
        double f_try = kInf;
        bool accepted = false;
        int bt = 0;
        auto eval_at = [&](double a_) {
            y_try.x = res.y.x + a_ * p;
            apply_constraints(y_try, constraints);
            return obj.value(y_try);
        };
        for (; bt <= opts.max_backtracks; ++bt) {
            f_try = eval_at(alpha);
            if (std::isfinite(f_try) && f_try <= f + opts.armijo * alpha * slope) {
                accepted = true;
                break;
            }
            alpha *= opts.backtrack;
        }
        if (accepted && bt == 0 && !use_lbfgs) {
            for (int e = 0; e < 40; ++e) {
                double alpha2 = alpha / opts.backtrack;
                double f2 = eval_at(alpha2);
                if (std::isfinite(f2) && f2 <= f + opts.armijo * alpha2 * slope && f2 < f_try) {
                    alpha = alpha2;
                    f_try = f2;
                } else {
                    break;
                }
            }
            f_try = eval_at(alpha); // restore y_try for the accepted alpha
        }
        if (!accepted) {
            res.status = SolveStatus::LineSearchFail;
            res.line_search_failed = true;
            res.energy = f;
            return res;
        }

        obj.on_accept(y_try);
        obj.gradient(y_try, g_new);
        res.inextensible_active_nodes = mask_gradient(g_new, y_try, constraints);

        if (use_lbfgs) {
            Eigen::VectorXd sv = y_try.x - res.y.x;
            Eigen::VectorXd yv = g_new - g;
            double sy = sv.dot(yv);
            if (sy > 1e-12 * sv.norm() * yv.norm()) {
                s_hist.push_back(std::move(sv));
                y_hist.push_back(std::move(yv));
                rho_hist.push_back(1.0 / sy);
                if (int(s_hist.size()) > opts.lbfgs_memory) {
                    s_hist.pop_front();
                    y_hist.pop_front();
                    rho_hist.pop_front();
                }
            }
        }
        res.y = std::move(y_try);
        f = f_try;
        g = g_new;
        alpha_prev = alpha;
    }
    res.grad_norm = g.norm();
    res.energy = f;
    res.status = SolveStatus::MaxIters;
    return res;
}

EnergyObjective::EnergyObjective(EnergyModel& model, const SolveOptions& opts) : model_(&model) {
    derivative_tol_ = opts.descent_tol_scale * model.fluid().g * model.fluid().rho_f
                      * model.mesh().total_volume;
    depth_limit_ = opts.sink_depth_factor;
}

double EnergyObjective::value(const DeformationField& y) { return model_->total_energy(y); }

void EnergyObjective::gradient(const DeformationField& y, Eigen::VectorXd& out) {
    model_->gradient(y, out);
}

EnergyBreakdown EnergyObjective::breakdown(const DeformationField& y) {
    return model_->energy(y);
}

void EnergyObjective::on_accept(const DeformationField& y) {
    if (model_->variant() == Variant::Ship)
        model_->refresh_ship_cache(y);
}

bool EnergyObjective::unbounded_descent(const DeformationField& y) {
    const double h = model_->waterline();
    if (float_classify(model_->mesh(), y, h) != FloatClass::FullyImmersed)
        return false;
    if (model_->descent_derivative(y) >= -derivative_tol_)
        return false;
    double bary_v = barycenter(model_->mesh(), y)[model_->mesh().dim - 1];
    return bary_v < h - depth_limit_ * diameter(model_->mesh(), y);
}

SolveResult minimize_scheduled(EnergyModel& model, const DeformationField& y0,
                               const SolveOptions& opts, const Constraints& constraints,
                               const TraceFn& trace) {
    EnergyObjective obj(model, opts);
    std::vector<double> kappas = opts.kappa_schedule;
    if (kappas.empty())
        kappas.push_back(model.incompressibility_weight());

    DeformationField y = y0;
    SolveResult res;
    int iter_offset = 0;
    TraceFn shifted = trace ? TraceFn([&](int it, const EnergyBreakdown& b, double gn) {
        trace(iter_offset + it, b, gn);
    })
                            : TraceFn{};
    for (std::size_t stage = 0; stage < kappas.size(); ++stage) {
        if (model.material().mode == MaterialParams::Mode::IncompressiblePenalty)
            model.set_incompressibility_weight(kappas[stage]);
        if (opts.mean_j_floor > 0) {
            // Ramp the floor weight geometrically up to the final value.
            double w = opts.mean_j_weight
                       * std::pow(10.0, -double(kappas.size() - 1 - stage));
            model.set_mean_jacobian_floor(opts.mean_j_floor, w);
        }
        if (model.variant() == Variant::Ship)
            model.refresh_ship_cache(y);
        res = minimize(obj, y, opts, constraints, shifted);
        iter_offset += res.iterations;
        y = res.y;
        if (res.status == SolveStatus::UnboundedDescent)
            break;
    }
    res.iterations = iter_offset;
    if (opts.mean_j_floor > 0)
        res.mean_j_floor_active =
            mean_jacobian(model.mesh(), res.y) <= opts.mean_j_floor + 1e-9;
    return res;
}

bool detect_unbounded(const ReferenceMesh& mesh, const std::vector<DeformationField>& trajectory,
                      const FluidEnvironment& fluid, const DensityModel& density,
                      const MaterialParams& material, double K, double derivative_tol_scale) {
    (void)material;
    if (trajectory.size() < 2)
        throw std::invalid_argument("detect_unbounded: needs a trajectory of at least 2 states");
    const DeformationField& y = trajectory.back();
    const double h = fluid.h;
    if (float_classify(mesh, y, h) != FloatClass::FullyImmersed)
        return false;
    double weight = 0;
    for (int e = 0; e < mesh.n_elements(); ++e)
        weight += density.is_porous()
                      ? density.rho_w * mesh.elem_volume[e]
                      : density.element_density(mesh.region_tags[e]) * mesh.elem_volume[e];
    weight *= fluid.g;
    double displaced = fluid.g * fluid.rho_f * submerged_volume(mesh, y, h);
    double tol = derivative_tol_scale * fluid.g * fluid.rho_f * mesh.total_volume;
    if (displaced - weight >= -tol)
        return false;
    double bary_v = barycenter(mesh, y)[mesh.dim - 1];
    return bary_v < h - K * diameter(mesh, y);
}

} // namespace floatelast
