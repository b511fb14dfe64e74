// Wall-clock comparison of the OpenMP kernels against their serial
// reference twins: ensemble bracket estimation and the lattice solve.

#include <chrono>
#include <cstdio>

#include "gbdsde/reference.hpp"

using namespace gbdsde;

namespace {

double seconds(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
}

template <class Fn>
double time_it(Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    return seconds(start);
}

}  // namespace

int main() {
    std::printf("threads available: %d\n\n", max_threads());
    std::printf("%-32s %10s %10s %8s\n", "kernel", "serial[s]", "openmp[s]",
                "speedup");

    const JumpMeasure measure{{{1.0, 0.5}, {-1.0, 0.5}}};
    const TimeGrid grid(1.0, 50);

    {
        PathEnsemble ens;
        ens.measure = measure;
        ens.basis = build_basis(measure);
        ens.grid = grid;
        ens.seed = 7;
        ens.paths = 200000;
        MeanStdError serial_out, parallel_out;
        const double t_serial =
            time_it([&] { serial_out = ref::empirical_bracket_serial(ens, 1, 1, 1.0); });
        const double t_parallel =
            time_it([&] { parallel_out = empirical_bracket(ens, 1, 1, 1.0); });
        std::printf("%-32s %10.3f %10.3f %7.2fx  (agree: %s)\n",
                    "bracket, 2e5 paths", t_serial, t_parallel,
                    t_serial / t_parallel,
                    serial_out.mean == parallel_out.mean ? "yes" : "NO");
    }

    {
        const auto basis = build_basis(measure);
        const TimeGrid solve_grid(1.0, 220);
        const auto lattice = build_lattice(measure, basis, solve_grid);
        const auto bpath = simulate_brownian(solve_grid, 11);
        const auto clock = clock_values(ClockProfile{}, solve_grid);
        DriverSpec driver;
        driver.f = [](double, double y, std::span<const double> z) {
            return -0.5 * y + 0.2 * z[0] - 0.1 * z[1];
        };
        driver.g = [](double, double y, std::span<const double>) { return 0.3 * y; };
        driver.h = [](double, double y) { return -0.2 * y; };
        driver.lipschitz = true;
        driver.lipschitz_k = 0.5;
        TerminalSpec terminal{
            [](const TerminalState& t) { return std::abs(t.levy); }};

        Solution serial_sol, parallel_sol;
        const double t_serial = time_it([&] {
            serial_sol =
                ref::solve_backward_serial(lattice, driver, terminal, bpath, clock);
        });
        const double t_parallel = time_it([&] {
            parallel_sol = solve_backward(lattice, driver, terminal, bpath, clock);
        });
        std::printf("%-32s %10.3f %10.3f %7.2fx  (agree: %s)\n",
                    "lattice solve, m=2, N=220", t_serial, t_parallel,
                    t_serial / t_parallel,
                    serial_sol.y == parallel_sol.y ? "yes" : "NO");
    }

    return 0;
}
