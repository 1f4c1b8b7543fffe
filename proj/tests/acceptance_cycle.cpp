// Criterion 6 (long-running, optional tier): after full four-phase training,
// full pumping cycles must show positive mean net energy, traction energy at
// least 1.5x the magnitude of the retraction+R2T consumption, and retraction
// lasting longer than traction (+/-50% on the ratios).
//
// Training the four agents takes days of CPU time, so this binary evaluates
// an existing checkpoint directory: pass it via AWE_CYCLE_CHECKPOINTS (or
// place <phase>.td3c files in ./checkpoints). Without checkpoints it skips
// (exit 77).
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>

#include "awe/trainer.hpp"

using namespace awe;
namespace fs = std::filesystem;

int main() {
    std::string dir = "checkpoints";
    if (const char* s = std::getenv("AWE_CYCLE_CHECKPOINTS")) dir = s;

    const char* phases[4] = {"traction", "t2r", "retraction", "r2t"};
    for (const char* p : phases) {
        if (!fs::exists(fs::path(dir) / (std::string(p) + ".td3c"))) {
            std::printf("[SKIP] 6. full-cycle reproduction - no trained checkpoints at '%s' "
                        "(set AWE_CYCLE_CHECKPOINTS after running `awe train`)\n",
                        dir.c_str());
            return 77;
        }
    }

    RunConfig cfg = RunConfig::defaults();
    cfg.seed = 20240812;
    cfg.wind.type = WindSpec::Type::Constant;
    cfg.wind.speed = 10.0;

    CycleReport rep = evaluate(cfg, dir, 100, nullptr);
    std::printf("%s", rep.to_table_text().c_str());

    double e_traction = rep.rows[0].mean_energy_ok_kwh;
    double e_consumed = std::abs(rep.rows[2].mean_energy_ok_kwh) +
                        std::abs(rep.rows[3].mean_energy_ok_kwh);
    double d_traction = rep.rows[0].mean_duration_ok_s;
    double d_retraction = rep.rows[2].mean_duration_ok_s;

    bool net_positive = rep.total_energy_ok_kwh > 0.0 && rep.n_completed > 0;
    bool energy_ratio = e_consumed > 0.0 && e_traction >= 1.5 * e_consumed;
    bool duration_order = d_retraction > d_traction;

    std::printf("  net cycle energy (completed): %.5f kWh -> %s\n", rep.total_energy_ok_kwh,
                net_positive ? "ok" : "violated");
    std::printf("  traction/consumption energy ratio: %.2f (need >= 1.5) -> %s\n",
                e_consumed > 0 ? e_traction / e_consumed : 0.0,
                energy_ratio ? "ok" : "violated");
    std::printf("  retraction %.1f s vs traction %.1f s -> %s\n", d_retraction, d_traction,
                duration_order ? "ok" : "violated");

    bool ok = net_positive && energy_ratio && duration_order;
    std::printf("[%s] 6. full-cycle qualitative reproduction\n", ok ? "PASS" : "FAIL");
    return ok ? 0 : 1;
}
