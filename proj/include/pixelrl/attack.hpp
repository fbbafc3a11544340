#pragma once

#include <cstdint>
#include <vector>

#include "pixelrl/image.hpp"
#include "pixelrl/policy.hpp"
#include "pixelrl/victim.hpp"

namespace pixelrl {

// What the reward is measured against. All confidences reference the
// ORIGINAL clean image, so per-cycle best rewards are comparable across
// Forget cycles.
struct RewardSpec {
  VictimTask task = VictimTask::classify;
  // classification
  int true_label = 0;
  double clean_true_prob = 0.0;
  // detection: the clean image's detected objects and their confidences
  std::vector<Detection> clean_detections;
};

// How action sets are produced: the trained policy, or uniform-random
// pixel actions (the baseline comparator).
enum class ActionSource { policy, uniform_random };

struct AttackConfig {
  double alpha = 0.01;           // pixel attack rate
  double eta = 0.05;             // bound threshold
  int convergence_duration = 3;  // T: consecutive bounded epochs
  int max_cycles = 100;
  int max_epochs_per_cycle = 500;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
  bool use_memory = true;
  bool use_initialization = true;
  ActionSource source = ActionSource::policy;
  // detection: objects that must disappear before success is declared
  // (1 = any removal; set to n(x) to demand full removal)
  int min_objects_removed = 1;
  // 0 = unlimited; otherwise a hard cap on victim queries for this attack
  std::uint64_t max_total_queries = 0;
};

struct AttackResult {
  bool success = false;
  Image adversarial{1, 1, 1};
  Perturbation delta;  // against the original clean image
  std::uint64_t queries = 0;
  int cycles_used = 0;
  int pixel_budget = 0;  // N used per cycle
  std::vector<double> reward_trace;  // per-epoch rewards, all cycles
  std::vector<double> cycle_best_rewards;
};

enum class RememberExit { converged, success, epoch_cap, query_cap };

struct RememberResult {
  // memorized best (or final epoch image, memory off)
  Image best{1, 1, 1};
  double best_reward = 0.0;
  int epochs = 0;       // == victim queries issued this cycle
  RememberExit exit = RememberExit::converged;
  std::vector<double> reward_trace;
  std::vector<double> memory_trace;  // r* after each epoch
};

// N = max(1, floor((H+W)/2 * alpha)).
int pixel_budget(int height, int width, double alpha);

// r = (f_y(x) - f_y(xbar)) + 1{argmax != y}.
double reward_classification(double clean_true_prob,
                             const ClassifierOutput& perturbed, int true_label);

// r = sum_o (f^o(x) - f^o(xbar)) + (n(x) - n(xbar)).
double reward_detection(const std::vector<Detection>& clean_dets,
                        const DetectorOutput& new_out);

// True iff (r_t - r_ref) / max(|r_ref|, 1e-8) < eta. r_ref is the memorized
// best reward from BEFORE this epoch's memory update.
bool bound_check(double r_t, double r_ref, double eta);

// Inner loop: sample actions, query, reward, memory update, policy update,
// until the reward stays bounded for T consecutive epochs or the attack
// objective is met. One victim query per epoch.
RememberResult remember_process(const Image& x_in, const Victim& victim,
                                const RewardSpec& spec,
                                const AttackConfig& cfg, TrainState& state,
                                QueryCounter& counter, int n_pixels,
                                std::uint64_t queries_so_far = 0);

// Outer loop: run Remember cycles, resetting agent and memory between them
// and feeding each cycle's best image forward, until success or the cycle
// cap. The caller builds the RewardSpec from its own clean-image query.
AttackResult run_attack(const Image& x, const Victim& victim,
                        const RewardSpec& spec, const AttackConfig& cfg,
                        QueryCounter& counter);

}  // namespace pixelrl
