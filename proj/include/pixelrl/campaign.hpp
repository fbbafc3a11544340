#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pixelrl/attack.hpp"
#include "pixelrl/metrics.hpp"
#include "pixelrl/victim.hpp"

namespace pixelrl {

struct VictimSpec {
  std::string type;  // linear_softmax | tiny_cnn | grid_detector | remote
  std::string weights;
  int cell_size = 16;
  double threshold = 0.5;
  double steepness = 30.0;
  std::string host = "127.0.0.1";
  int port = 0;
  std::string task = "classify";  // which endpoint task a remote victim serves
};

struct CampaignConfig {
  std::string task;  // classify | detect
  VictimSpec victim;
  std::string input_dir;
  std::vector<std::string> inputs;  // explicit list; overrides input_dir
  std::string labels_path;          // classification
  std::string output_dir;
  AttackConfig attack;
  std::string removal_target = "any";  // any | all (detection success rule)
  int workers = 1;
  std::uint64_t baseline_query_budget = 0;  // flat per-image budget
  bool write_artifacts = true;
};

// Parses and validates a JSON campaign config, applying per-task defaults
// (classify: T=3, alpha=0.01; detect: T=20; eta=0.05, max_cycles=100).
// Throws ConfigError naming the offending field.
CampaignConfig load_config(const std::string& path);

std::unique_ptr<Victim> make_victim(const VictimSpec& spec);

// Per-image seed derivation: splitmix64(campaign_seed + GOLDEN * (index+1)),
// so the i-th input always draws the i-th seed regardless of file names.
std::uint64_t per_image_seed(std::uint64_t campaign_seed, std::size_t index);

// Runs the attack over every input image, applying the skip rules
// (classify: already-misclassified images; detect: images with no objects),
// writing per-image artifacts and the aggregate report to the output dir.
// Per-image failures are recorded and the campaign continues.
CampaignReport run_campaign(const CampaignConfig& cfg);

// Same harness with uniform-random pixel actions in place of the policy,
// at a per-image query budget: `budgets` maps image name to budget (from a
// paired run); images absent from the map fall back to the flat
// baseline_query_budget.
CampaignReport run_random_baseline(
    const CampaignConfig& cfg,
    const std::map<std::string, std::uint64_t>& budgets = {});

}  // namespace pixelrl
