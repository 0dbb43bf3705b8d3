#pragma once

#include "floatelast/energy.hpp"

#include <functional>
#include <vector>

namespace floatelast {

struct SolveOptions {
    int max_iters = 4000;
    double grad_tol = 1e-4;
    // Step controls: first trial displacement as a fraction of the body
    // diameter, backtracking factor and the Armijo sufficient-decrease
    // constant.
    double initial_step = 0.01;
    double backtrack = 0.5;
    double armijo = 1e-4;
    int max_backtracks = 60;
    double sink_depth_factor = 5; // K: unboundedness trigger depth, in diameters
    double descent_tol_scale = 1e-8; // derivative tolerance, times g rho_f |Omega|
    std::vector<double> kappa_schedule; // incompressibility weights, last is final
    double mean_j_floor = -1;           // tau; < 0 disables
    double mean_j_weight = 1e4;         // final floor penalty weight
    enum class Strategy { GradientDescent, Lbfgs } strategy = Strategy::Lbfgs;
    int lbfgs_memory = 10;

    void validate() const;
};

enum class SolveStatus { Converged, UnboundedDescent, MaxIters, LineSearchFail };
const char* to_string(SolveStatus s);

struct SolveResult {
    DeformationField y;
    SolveStatus status = SolveStatus::MaxIters;
    int iterations = 0;
    double grad_norm = 0;
    double energy = 0;
    bool mean_j_floor_active = false;
    int inextensible_active_nodes = 0;
    bool line_search_failed = false;
};

/// Generic objective: total energy (+inf allowed outside the admissible set)
/// and its gradient, plus optional hooks the solver calls on accepted states.
struct Objective {
    virtual ~Objective() = default;
    virtual double value(const DeformationField& y) = 0;
    virtual void gradient(const DeformationField& y, Eigen::VectorXd& out) = 0;
    virtual EnergyBreakdown breakdown(const DeformationField& y) {
        EnergyBreakdown b;
        b.total = value(y);
        return b;
    }
    virtual void on_accept(const DeformationField& y) { (void)y; }
    // Returns true when the trajectory demonstrates unbounded descent.
    virtual bool unbounded_descent(const DeformationField& y) {
        (void)y;
        return false;
    }
};

/// Hard constraints handled by the solver: clamped nodes never move;
/// inextensible nodes are projected onto the ball |y - y_D| <= lambda after
/// every step.
struct Constraints {
    std::vector<int> clamped_nodes;
    std::vector<double> clamped_targets; // flat dim per node
    std::vector<int> inextensible_nodes;
    std::vector<double> inextensible_targets;
    double lambda = 0;

    bool any() const { return !clamped_nodes.empty() || !inextensible_nodes.empty(); }
    static Constraints from_anchor(const AnchorSpec& anchor, const ReferenceMesh& mesh,
                                   const DeformationField& y0);
};

using TraceFn = std::function<void(int iter, const EnergyBreakdown&, double grad_norm)>;

// Backtracking-line-search descent (plain gradient or L-BFGS directions)
// with monotone accepted energies. Throws if y0 is inadmissible.
SolveResult minimize(Objective& objective, const DeformationField& y0, const SolveOptions& opts,
                     const Constraints& constraints = {}, const TraceFn& trace = {});

/// Objective adapter around EnergyModel, including the model-aware unbounded
/// descent test and the ship cavity refresh hook.
class EnergyObjective : public Objective {
public:
    explicit EnergyObjective(EnergyModel& model, const SolveOptions& opts);
    double value(const DeformationField& y) override;
    void gradient(const DeformationField& y, Eigen::VectorXd& out) override;
    EnergyBreakdown breakdown(const DeformationField& y) override;
    void on_accept(const DeformationField& y) override;
    bool unbounded_descent(const DeformationField& y) override;

private:
    EnergyModel* model_;
    double derivative_tol_;
    double depth_limit_; // h - K * diameter
};

// Runs minimize over the incompressibility / mean-J penalty schedule,
// warm-starting every stage. The floor weight ramps to opts.mean_j_weight.
SolveResult minimize_scheduled(EnergyModel& model, const DeformationField& y0,
                               const SolveOptions& opts, const Constraints& constraints = {},
                               const TraceFn& trace = {});

// Standalone unbounded-descent diagnostic over a trajectory of states: the
// final state must be fully immersed, with a negative descent derivative
// beyond tolerance and a barycenter below h - K * diameter.
bool detect_unbounded(const ReferenceMesh& mesh, const std::vector<DeformationField>& trajectory,
                      const FluidEnvironment& fluid, const DensityModel& density,
                      const MaterialParams& material, double K = 5.0,
                      double derivative_tol_scale = 1e-8);

} // namespace floatelast
