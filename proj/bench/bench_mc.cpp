#include "rsg/instances.hpp"
#include "rsg/montecarlo.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>

using namespace rsg;

namespace {

template <class F>
double seconds(F&& f) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    const long paths = argc > 1 ? std::atol(argv[1]) : 20000;
    const int N = argc > 2 ? std::atoi(argv[2]) : 200;
    EquilibriumSolution sol = solve_game(scalar_spec(moderate_instance(), N));
    SimPlan plan = make_plan(sol, 1);
    std::printf("threads available: %d, paths %ld, steps %d\n", omp_get_max_threads(), paths, plan.steps);

    SimConfig cfg;
    cfg.paths = paths;
    cfg.seed = 11;
    SimOutput a, b;
    cfg.parallel = false;
    double ts = seconds([&] { a = simulate_plan(plan, cfg); });
    cfg.parallel = true;
    double tp = seconds([&] { b = simulate_plan(plan, cfg); });
    bool same = a.J == b.J && a.Jf == b.Jf && a.Jtf == b.Jtf;
    std::printf("simulate   serial %.3fs  openmp %.3fs  speedup %.2f  identical %s\n", ts, tp, ts / tp,
                same ? "yes" : "NO");

    SimConfig pc;
    pc.paths = paths / 10;
    pc.seed = 11;
    PerturbationReport ra, rb;
    pc.parallel = false;
    ts = seconds([&] { ra = perturb_best_response(sol, pc, 4, {0.05}); });
    pc.parallel = true;
    tp = seconds([&] { rb = perturb_best_response(sol, pc, 4, {0.05}); });
    same = ra.rows.size() == rb.rows.size();
    for (std::size_t i = 0; same && i < ra.rows.size(); ++i)
        same = ra.rows[i].delta_j == rb.rows[i].delta_j && ra.rows[i].stderr_ == rb.rows[i].stderr_;
    std::printf("perturb    serial %.3fs  openmp %.3fs  speedup %.2f  identical %s\n", ts, tp, ts / tp,
                same ? "yes" : "NO");
    return same ? 0 : 1;
}
