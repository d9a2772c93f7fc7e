// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "oracles.hpp"
#include "pmelab/cli.hpp"

using namespace pmelab;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool passed;
    std::string detail;
};

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
    std::map<std::string, std::string> out;
    if (!fs::exists(dir)) return out;
    for (const auto& e : fs::directory_iterator(dir)) {
        std::ifstream in(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        out[e.path().filename().string()] = ss.str();
    }
    return out;
}

int quiet_dispatch(std::vector<std::string> args) {
    std::ostringstream out, err;
    return cli::dispatch(std::move(args), out, err);
}

const std::vector<double> kQs{1.0, 2.0, 5.0};
const std::vector<int> kNs{1, 2, 3};
const std::vector<double> kAlphas{0.5, 1.0, 2.0};

Verdict moser_oracles() {
    double worst = 0.0, limit_gap = 0.0;
    for (double q : kQs)
        for (int n : kNs)
            for (double a : kAlphas) {
                for (int m = 1; m <= 40; ++m) {
                    auto rel = [](double x, long double ref) { return static_cast<double>(std::abs((x - ref) / ref)); };
                    worst = std::max(worst, rel(exponents::moser_A(m, q, n, a), oracle::moser_A_product(m, q, n, a)));
                    worst = std::max(worst, rel(exponents::moser_exponent_sum(m, q, n, a), oracle::moser_S_sum(m, q, n, a)));
                    for (int j = 0; j <= m; ++j)
                        worst = std::max(worst, rel(exponents::moser_B(j, m, q, n, a), oracle::moser_B_product(j, m, q, n, a)));
                }
                limit_gap = std::max(limit_gap, std::abs(exponents::moser_A(40, q, n, a) - 2 * q / (2 * q + n * a)));
                limit_gap = std::max(limit_gap, std::abs(exponents::moser_exponent_sum(40, q, n, a) + n / (2 * q + n * a)));
            }
    return {worst <= 1e-12 && limit_gap <= 1e-9,
            "max rel err " + fmt("%.2e", worst) + ", max limit gap at m=40 " + fmt("%.2e", limit_gap)};
}

Verdict exponent_consistency() {
    double gap = 0.0;
    for (double q : kQs)
        for (int n : kNs)
            for (double a : kAlphas) {
                const auto s = exponents::smoothing_exponents(n, q, a);
                gap = std::max(gap, std::abs(exponents::moser_A(40, q, n, a) - s.delta0));
                gap = std::max(gap, std::abs(-exponents::moser_exponent_sum(40, q, n, a) - s.gamma0));
            }
    return {gap <= 1e-9, "max gap " + fmt("%.2e", gap)};
}

Verdict barenblatt_rate() {
    double worst = 0.0;
    for (auto [n, a] : std::vector<std::pair<int, double>>{{1, 0.5}, {1, 1.0}, {2, 1.0}}) {
        const BarenblattProfile p(n, a, 1.0);
        Series s;
        for (double t : logspace_times(1.0, 100.0, 40)) s.emplace_back(t, p.evaluate({0.0, 0.0}, t));
        const Fit f = fit_decay(s, 1.0, 100.0);
        worst = std::max(worst, std::abs(f.slope + exponents::smoothing_exponents(n, 1.0, a).gamma0));
    }
    return {worst <= 1e-10, "max |slope + gamma0| " + fmt("%.2e", worst)};
}

Verdict solver_accuracy() {
    cli::BarenblattOptions o;
    o.Ns = {400, 800};
    const auto rows = cli::barenblatt_refinement(o);
    const bool ok = rows[1].l1_error < rows[0].l1_error && rows[1].order >= 0.9;
    return {ok, "L1 error " + fmt("%.3e", rows[0].l1_error) + " -> " + fmt("%.3e", rows[1].l1_error) + ", order " +
                    fmt("%.3f", rows[1].order)};
}

Verdict smoothing_decay() {
    Problem p{Grid(1, 20.0, 800), 1.0, 1.0, flux::zero(1), initial::gaussian(), BoundaryPolicy::zero_flux};
    SchemeConfig c;
    c.t_end = 50.0;
    c.snapshot_times = {0.0};
    for (double t : logspace_times(0.5, 50.0, 41)) c.snapshot_times.push_back(t);
    const RunResult r = run(p, c);
    const DecayRecord rec = decay_record(r, kInfNorm, std::pair{5.0, 50.0});
    const bool ok = std::abs(rec.fitted_slope + 1.0 / 3.0) <= 0.03 && !r.boundary_flagged;
    return {ok, "slope " + fmt("%.4f", rec.fitted_slope) + " over [5, 50], boundary mass " +
                    fmt("%.1e", r.boundary_mass_max)};
}

Verdict lq_monotonicity() {
    double worst = -1.0;
    int runs = 0;
    for (const auto& f : {flux::burgers(1), flux::zero(1)})
        for (const auto& u0 : {initial::gaussian(), initial::odd_gaussian(), initial::box(1.0, 1.5)}) {
            Problem p{Grid(1, 10.0, 400), 1.0, 1.0, f, u0, BoundaryPolicy::zero_flux};
            if (!check_divergence_condition(f, p.grid, {-2.0, 2.0}, 64).satisfied) return {false, f.name + " fails (i)"};
            SchemeConfig c;
            c.t_end = 3.0;
            c.snapshot_times = linspace_times(0.0, 3.0, 61);
            for (const auto& e : audit_lq_monotonicity(run(p, c), {1.0, 2.0, 4.0, kInfNorm}))
                worst = std::max(worst, e.max_uptick);
            ++runs;
        }
    return {worst <= 1e-8, std::to_string(runs) + " runs, max relative uptick " + fmt("%.2e", worst)};
}

Verdict energy_inequality() {
    double worst = std::numeric_limits<double>::infinity();
    int audits = 0;
    std::string where;
    auto audit = [&](const RunResult& r, double t0, double alpha, const std::string& label) {
        for (double q : {2.0, 4.0})
            for (double g : {1.5, 2.0, 3.0}) {
                const auto a = audit_energy_inequality(r, q, g, t0, alpha);
                const double rel = a.rhs_term > 0.0 ? a.margin / a.rhs_term : 0.0;
                if (rel < worst) {
                    worst = rel;
                    where = label + " q=" + fmt("%g", q) + " gamma=" + fmt("%g", g);
                }
                ++audits;
            }
    };
    for (const auto& f : {flux::zero(1), flux::linear(1, 1.0), flux::burgers(1)})
        for (const auto& u0 : {initial::gaussian(), initial::odd_gaussian(), initial::box(1.0, 1.5)})
            for (double alpha : {0.5, 1.0, 2.0}) {
                Problem p{Grid(1, 10.0, 400), alpha, 1.0, f, u0, BoundaryPolicy::zero_flux};
                if (!check_divergence_condition(f, p.grid, {-2.0, 2.0}, 64).satisfied) continue;
                SchemeConfig c;
                c.t_end = 2.0;
                c.snapshot_times = linspace_times(0.0, 2.0, 81);
                audit(run(p, c), 0.0, alpha, f.name + "/" + u0.name + "/alpha=" + fmt("%g", alpha));
            }
    const BarenblattProfile b(1, 1.0, 1.0);
    Problem p{Grid(1, 20.0, 800), 1.0, 1.0, flux::zero(1), initial::barenblatt(b, 1.0), BoundaryPolicy::zero_flux, 1.0};
    SchemeConfig c;
    c.t_end = 2.0;
    c.snapshot_times = linspace_times(1.0, 2.0, 41);
    audit(run(p, c), 0.0, 1.0, "barenblatt");
    return {worst >= -0.05, std::to_string(audits) + " audits, worst margin/rhs " + fmt("%.4f", worst) + " (" + where + ")"};
}

Verdict sandwich() {
    Problem p{Grid(1, 10.0, 400), 1.0, 1.0, flux::burgers(1), initial::odd_gaussian(), BoundaryPolicy::zero_flux};
    SchemeConfig c;
    c.t_end = 2.0;
    c.snapshot_times = linspace_times(0.0, 2.0, 11);
    double worst = 0.0, prev = std::numeric_limits<double>::infinity();
    bool decreasing = true;
    std::string env;
    for (double eps : {0.1, 0.01, 0.001}) {
        const auto rep = run_sandwich(p, eps, initial::gaussian(), c);
        worst = std::min({worst, rep.max_lower_violation, rep.max_upper_violation});
        decreasing = decreasing && rep.envelope < prev;
        prev = rep.envelope;
        env += (env.empty() ? "" : " > ") + fmt("%.6f", rep.envelope);
    }
    return {worst >= -1e-12 && decreasing, "worst violation " + fmt("%.2e", worst) + ", envelopes " + env};
}

Verdict figure_one(const fs::path& scratch) {
    const auto res = figure1_experiment();
    const fs::path a = scratch / "fig_a", b = scratch / "fig_b";
    const int ca = quiet_dispatch({"figure1", "--out", a.string()});
    const int cb = quiet_dispatch({"figure1", "--out", b.string()});
    const auto fa = read_dir(a), fb = read_dir(b);
    bool has_csv = false, has_svg = false;
    for (const auto& [name, body] : fa) {
        has_csv = has_csv || name.ends_with(".csv");
        has_svg = has_svg || name.ends_with(".svg");
    }
    const bool stable = !fa.empty() && fa == fb;
    const bool ok = ca == 0 && cb == 0 && has_csv && has_svg && stable && res.l1_relative_drift <= 0.005;
    return {ok, "L1 drift " + fmt("%.2e", res.l1_relative_drift) + ", max |u(5)-u0| " + fmt("%.3f", res.max_change) +
                    (stable ? ", byte-stable" : ", NOT byte-stable")};
}

Verdict determinism(const fs::path& scratch) {
    const std::vector<std::vector<std::string>> commands{
        {"run"},          {"figure1"},   {"barenblatt-validate"},         {"decay-study"},
        {"moser-table"},  {"sandwich"},  {"check-flux", "--flux", "figure1"},
    };
    int files = 0;
    for (const auto& cmd : commands) {
        const fs::path a = scratch / ("det_a_" + cmd[0]), b = scratch / ("det_b_" + cmd[0]);
        auto ca = cmd, cb = cmd;
        ca.insert(ca.end(), {"--out", a.string()});
        cb.insert(cb.end(), {"--out", b.string()});
        const int ra = quiet_dispatch(ca), rb = quiet_dispatch(cb);
        const auto fa = read_dir(a), fb = read_dir(b);
        if (ra != rb || ra == 2 || fa.empty() || fa != fb) return {false, cmd[0] + " differs between runs"};
        files += static_cast<int>(fa.size());
    }
    return {true, std::to_string(commands.size()) + " commands, " + std::to_string(files) + " files identical"};
}

}  // namespace

int main() {
    const fs::path scratch = fs::temp_directory_path() / ("pmelab_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(scratch);
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Verdict()> check;
    };
    const std::vector<Criterion> criteria{
        {1, "Moser algebra matches brute-force products and sums", 1, moser_oracles},
        {2, "Moser limits equal smoothing exponents", 1, exponent_consistency},
        {3, "Barenblatt sup-norm decays at the optimal rate", 1, barenblatt_rate},
        {4, "solver converges to Barenblatt with order >= 0.9", 60, solver_accuracy},
        {5, "Gaussian sup-norm decay slope is -1/3 +- 0.03", 120, smoothing_decay},
        {6, "L^q norms are nonincreasing", 120, lq_monotonicity},
        {7, "weighted energy inequality within 5% slack", 120, energy_inequality},
        {8, "sign-splitting sandwich holds, envelope shrinks with eps", 180, sandwich},
        {9, "advection experiment reproduces qualitatively", 120, [&] { return figure_one(scratch); }},
        {10, "every command is byte-deterministic", 600, [&] { return determinism(scratch); }},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v{false, ""};
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.budget_s) {
            v.passed = false;
            v.detail += ", over time budget";
        }
        std::printf("%s criterion %d: %s (%s) [%.2fs]\n", v.passed ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(),
                    secs);
        std::fflush(stdout);
        if (!v.passed) ++failed;
    }
    fs::remove_all(scratch);
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
