#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "pixelrl/campaign.hpp"
#include "pixelrl/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Query-based black-box pixel attack campaign runner"};
  app.require_subcommand(1);

  std::string config_path;
  int workers = 0;
  bool baseline = false;
  std::string ablate;

  CLI::App* attack = app.add_subcommand("attack", "Run an attack campaign");
  attack->add_option("--config", config_path, "Campaign config JSON")
      ->required();
  attack->add_option("--workers", workers, "Parallel attack workers");
  attack->add_flag("--baseline", baseline,
                   "Also run the random-pixel baseline at the matched "
                   "per-image query budget");
  attack->add_option("--ablate", ablate,
                     "Disable components: memory|init|both")
      ->check(CLI::IsMember({"memory", "init", "both"}));

  CLI11_PARSE(app, argc, argv);

  try {
    pixelrl::CampaignConfig cfg = pixelrl::load_config(config_path);
    if (workers > 0) cfg.workers = workers;
    if (ablate == "memory" || ablate == "both") cfg.attack.use_memory = false;
    if (ablate == "init" || ablate == "both") {
      cfg.attack.use_initialization = false;
    }

    pixelrl::CampaignReport report = pixelrl::run_campaign(cfg);
    std::cout << "attacked " << report.attacked_images << " images, skipped "
              << report.skipped_images << ", success rate "
              << report.success_rate << ", mean queries "
              << report.mean_queries << "\n";

    if (baseline) {
      std::map<std::string, std::uint64_t> budgets;
      for (const auto& img : report.images) {
        if (img.attacked) budgets[img.name] = img.queries;
      }
      pixelrl::CampaignReport base = pixelrl::run_random_baseline(cfg, budgets);
      std::cout << "baseline success rate " << base.success_rate
                << ", mean queries " << base.mean_queries << "\n";
    }
    return 0;
  } catch (const pixelrl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
