#include "pixelrl/attack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pixelrl/errors.hpp"

namespace pixelrl {

int pixel_budget(int height, int width, double alpha) {
  if (alpha <= 0.0) throw std::invalid_argument("alpha must be > 0");
  double n = std::floor((height + width) / 2.0 * alpha);
  return std::max(1, static_cast<int>(n));
}

double reward_classification(double clean_true_prob,
                             const ClassifierOutput& perturbed,
                             int true_label) {
  if (true_label < 0 ||
      true_label >= static_cast<int>(perturbed.probs.size())) {
    throw std::invalid_argument("true_label out of range");
  }
  double omega = predicted_class(perturbed) != true_label ? 1.0 : 0.0;
  return (clean_true_prob - perturbed.probs[true_label]) + omega;
}

double reward_detection(const std::vector<Detection>& clean_dets,
                        const DetectorOutput& new_out) {
  if (clean_dets.empty()) {
    throw std::invalid_argument("reward_detection: no clean detections");
  }
  std::vector<double> new_confs = match_confidences(clean_dets, new_out);
  double r = 0.0;
  for (std::size_t o = 0; o < clean_dets.size(); ++o) {
    r += clean_dets[o].confidence - new_confs[o];
  }
  int n_clean = static_cast<int>(clean_dets.size());
  r += n_clean - detected_count(new_out);
  return r;
}

bool bound_check(double r_t, double r_ref, double eta) {
  return (r_t - r_ref) / std::max(std::abs(r_ref), 1e-8) < eta;
}

namespace {

SampledBatch sample_uniform(const Image& x, int n_pixels,
                            std::mt19937_64& rng) {
  SampledBatch batch;
  std::uniform_int_distribution<int> row_d(0, x.height() - 1);
  std::uniform_int_distribution<int> col_d(0, x.width() - 1);
  std::uniform_int_distribution<int> bit(0, 1);
  for (int i = 0; i < n_pixels; ++i) {
    PixelAction a;
    a.row = row_d(rng);
    a.col = col_d(rng);
    a.values.resize(x.channels());
    for (int c = 0; c < x.channels(); ++c) {
      a.values[c] = bit(rng) ? 1.0 : 0.0;
    }
    batch.actions.push_back(std::move(a));
  }
  return batch;
}

struct EpochEval {
  double reward = 0.0;
  bool success = false;
};

EpochEval evaluate(const Image& xbar, const Victim& victim,
                   const RewardSpec& spec, const AttackConfig& cfg,
                   QueryCounter& counter) {
  EpochEval ev;
  if (spec.task == VictimTask::classify) {
    ClassifierOutput out = query_classifier(victim, xbar, counter);
    ev.reward = reward_classification(spec.clean_true_prob, out,
                                      spec.true_label);
    ev.success = predicted_class(out) != spec.true_label;
  } else {
    DetectorOutput out = query_detector(victim, xbar, counter);
    ev.reward = reward_detection(spec.clean_detections, out);
    int removed = static_cast<int>(spec.clean_detections.size()) -
                  detected_count(out);
    ev.success = removed >= cfg.min_objects_removed;
  }
  return ev;
}

}  // namespace

RememberResult remember_process(const Image& x_in, const Victim& victim,
                                const RewardSpec& spec,
                                const AttackConfig& cfg, TrainState& state,
                                QueryCounter& counter, int n_pixels,
                                std::uint64_t queries_so_far) {
  RememberResult res;
  res.best = x_in;
  res.best_reward = -std::numeric_limits<double>::infinity();

  Image last = x_in;
  double prev_reward = 0.0;
  int streak = 0;
  state.epoch = 0;

  for (int t = 1; t <= cfg.max_epochs_per_cycle; ++t) {
    if (cfg.max_total_queries != 0 &&
        queries_so_far + static_cast<std::uint64_t>(res.epochs) >=
            cfg.max_total_queries) {
      res.exit = RememberExit::query_cap;
      break;
    }
    state.epoch = t;

    SampledBatch batch;
    if (cfg.source == ActionSource::policy) {
      ForwardResult fwd = state.policy.forward(x_in);
      batch = state.policy.sample(fwd, state.rng);
    } else {
      batch = sample_uniform(x_in, n_pixels, state.rng);
    }
    Image xbar = apply_actions(x_in, batch.actions);
    EpochEval ev = evaluate(xbar, victim, spec, cfg, counter);
    ++res.epochs;
    res.reward_trace.push_back(ev.reward);

    if (ev.reward > res.best_reward) {
      res.best_reward = ev.reward;
      res.best = xbar;
    }
    res.memory_trace.push_back(res.best_reward);

    if (ev.success) {
      res.best = xbar;
      res.best_reward = ev.reward;
      res.exit = RememberExit::success;
      return res;
    }

    // The bound reference is the value from before this epoch: the
    // memorized best (or, with memory ablated, the previous epoch's
    // reward). The first epoch compares against itself.
    double ref;
    if (t == 1) {
      ref = ev.reward;
    } else if (cfg.use_memory) {
      ref = res.memory_trace[t - 2];
    } else {
      ref = prev_reward;
    }
    streak = bound_check(ev.reward, ref, cfg.eta) ? streak + 1 : 0;
    prev_reward = ev.reward;
    last = std::move(xbar);

    if (cfg.source == ActionSource::policy) {
      try {
        reinforce_update(state, x_in, batch, ev.reward, cfg.learning_rate);
      } catch (const NumericError&) {
        res.exit = RememberExit::converged;
        break;
      }
    }

    if (streak >= cfg.convergence_duration) {
      res.exit = RememberExit::converged;
      break;
    }
    if (t == cfg.max_epochs_per_cycle) {
      res.exit = RememberExit::epoch_cap;
    }
  }

  if (!cfg.use_memory) {
    res.best = last;
    res.best_reward = res.reward_trace.empty() ? 0.0
                                               : res.reward_trace.back();
  }
  if (res.epochs == 0) {
    // query cap hit before the first epoch
    res.best = x_in;
    res.best_reward = 0.0;
  }
  return res;
}

AttackResult run_attack(const Image& x, const Victim& victim,
                        const RewardSpec& spec, const AttackConfig& cfg,
                        QueryCounter& counter) {
  const int n_pixels = pixel_budget(x.height(), x.width(), cfg.alpha);
  std::mt19937_64 master(cfg.seed);

  TrainState state;
  if (cfg.source == ActionSource::policy) {
    state.policy = Policy::init(master, x.channels(), x.height(), x.width(),
                                n_pixels);
  }
  state.rng.seed(master());

  AttackResult result;
  result.adversarial = x;
  result.pixel_budget = n_pixels;

  Image x_cur = x;
  std::uint64_t queries_total = 0;
  double best_overall = -std::numeric_limits<double>::infinity();

  for (int cycle = 1; cycle <= cfg.max_cycles; ++cycle) {
    RememberResult res = remember_process(x_cur, victim, spec, cfg, state,
                                          counter, n_pixels, queries_total);
    queries_total += res.epochs;
    result.reward_trace.insert(result.reward_trace.end(),
                               res.reward_trace.begin(),
                               res.reward_trace.end());
    result.cycles_used = cycle;

    // With memory on, the incoming image IS the memorized best so far; a
    // cycle that never beats it keeps it, and the per-cycle best trace
    // (measured against the original clean image) stays non-decreasing.
    bool improved = res.best_reward > best_overall;
    if (res.exit == RememberExit::success || !cfg.use_memory || improved) {
      x_cur = res.best;
      best_overall = std::max(best_overall, res.best_reward);
    }
    result.cycle_best_rewards.push_back(
        cfg.use_memory ? best_overall : res.best_reward);

    if (res.exit == RememberExit::success) {
      result.success = true;
      break;
    }
    if (res.exit == RememberExit::query_cap) break;

    // Forget: clear memory (implicit in the next remember_process call),
    // reset the epoch counter, and optionally re-initialize the agent.
    state.epoch = 0;
    if (cfg.use_initialization && cfg.source == ActionSource::policy) {
      state.policy = Policy::init(master, x.channels(), x.height(), x.width(),
                                  n_pixels);
    }
  }

  result.adversarial = x_cur;
  result.delta = diff_perturbation(x, x_cur);
  result.queries = queries_total;
  return result;
}

}  // namespace pixelrl
