#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "pixelrl/campaign.hpp"
#include "pixelrl/errors.hpp"
#include "pixelrl/image_io.hpp"
#include "pixelrl/weights.hpp"

using namespace pixelrl;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
}

// Minimal valid classify config against the bundled fixtures.
std::string classify_config_json(const fs::path& out_dir,
                                 const std::string& extra = "") {
  std::string fx = fixtures_dir();
  return std::string("{\n") +
         "  \"task\": \"classify\",\n"
         "  \"victim\": { \"type\": \"tiny_cnn\", \"weights\": \"" +
         fx + "/tiny_cnn.pxw\" },\n" +
         "  \"inputs\": [\"" + fx + "/images/img_000.pxr\", \"" + fx +
         "/images/img_001.pxr\", \"" + fx + "/images/img_002.pxr\"],\n" +
         "  \"labels\": \"" + fx + "/labels.txt\",\n" +
         "  \"output_dir\": \"" + out_dir.string() + "\",\n" +
         "  \"attack\": { \"seed\": 7, \"max_cycles\": 3 }\n" + extra + "}\n";
}

}  // namespace

TEST_CASE("load_config applies per-task defaults") {
  fs::path dir = fresh_dir("pixelrl_cfg");
  fs::path cfg_path = dir / "cfg.json";
  write_file(cfg_path, classify_config_json(dir));
  CampaignConfig cfg = load_config(cfg_path.string());
  CHECK(cfg.task == "classify");
  CHECK(cfg.attack.convergence_duration == 3);
  CHECK(cfg.attack.alpha == 0.01);
  CHECK(cfg.attack.eta == 0.05);
  CHECK(cfg.attack.max_cycles == 3);  // explicit value wins
  CHECK(cfg.attack.seed == 7);
  CHECK(cfg.workers == 1);

  // detect defaults: T = 20
  write_file(cfg_path,
             "{ \"task\": \"detect\",\n"
             "  \"victim\": { \"type\": \"grid_detector\", \"cell_size\": 16 },\n"
             "  \"inputs\": [\"" + fixtures_dir() + "/det_images/det_00.pxr\"],\n"
             "  \"output_dir\": \"" + dir.string() + "\" }");
  CampaignConfig dcfg = load_config(cfg_path.string());
  CHECK(dcfg.attack.convergence_duration == 20);
  CHECK(dcfg.attack.eta == 0.05);
  CHECK(dcfg.attack.max_cycles == 100);
}

TEST_CASE("load_config rejects bad fields by name") {
  fs::path dir = fresh_dir("pixelrl_cfg_bad");
  fs::path cfg_path = dir / "cfg.json";

  auto expect_error_mentioning = [&](const std::string& json,
                                     const std::string& field) {
    write_file(cfg_path, json);
    try {
      load_config(cfg_path.string());
      FAIL_CHECK("expected ConfigError for field " << field);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(field) != std::string::npos);
    }
  };

  expect_error_mentioning("{ \"task\": \"segment\" }", "task");
  expect_error_mentioning(
      "{ \"task\": \"classify\", \"victim\": { \"type\": \"bogus\" } }",
      "victim");
  std::string good_input =
      "\"inputs\": [\"" + fixtures_dir() + "/images/img_000.pxr\"]";
  std::string good_labels =
      "\"labels\": \"" + fixtures_dir() + "/labels.txt\"";
  expect_error_mentioning(
      "{ \"task\": \"classify\",\n"
      "  \"victim\": { \"type\": \"tiny_cnn\", \"weights\": \"w.pxw\" },\n"
      "  " + good_input + ", " + good_labels + ", \"output_dir\": \"o\",\n"
      "  \"attack\": { \"eta\": -1 } }",
      "eta");
  // classification requires labels
  expect_error_mentioning(
      "{ \"task\": \"classify\",\n"
      "  \"victim\": { \"type\": \"tiny_cnn\", \"weights\": \"w.pxw\" },\n"
      "  " + good_input + ", \"output_dir\": \"o\" }",
      "labels");
  // a listed input that does not exist is rejected at load time
  expect_error_mentioning(
      "{ \"task\": \"classify\",\n"
      "  \"victim\": { \"type\": \"tiny_cnn\", \"weights\": \"w.pxw\" },\n"
      "  \"inputs\": [\"/nonexistent/x.pxr\"], " + good_labels + " }",
      "inputs");
  write_file(cfg_path, "not json at all {");
  CHECK_THROWS_AS(load_config(cfg_path.string()), ConfigError);
}

TEST_CASE("per_image_seed is stable and spreads") {
  CHECK(per_image_seed(0, 0) == per_image_seed(0, 0));
  CHECK(per_image_seed(0, 0) != per_image_seed(0, 1));
  CHECK(per_image_seed(0, 0) != per_image_seed(1, 0));
  // ~unique over a modest range
  std::set<std::uint64_t> seen;
  for (std::size_t i = 0; i < 1000; ++i) seen.insert(per_image_seed(42, i));
  CHECK(seen.size() == 1000);
}

TEST_CASE("campaign runs, writes artifacts, and is deterministic") {
  fs::path out1 = fresh_dir("pixelrl_camp1");
  fs::path out2 = fresh_dir("pixelrl_camp2");
  fs::path cfg_path = out1 / "cfg.json";

  write_file(cfg_path, classify_config_json(out1));
  CampaignConfig cfg = load_config(cfg_path.string());
  cfg.attack.max_epochs_per_cycle = 40;  // keep the test fast
  CampaignReport rep1 = run_campaign(cfg);

  CHECK(rep1.images.size() == 3);
  CHECK(rep1.attacked_images + rep1.skipped_images == 3);
  CHECK(fs::exists(out1 / "report.json"));
  CHECK(fs::exists(out1 / "report.csv"));
  for (const ImageSummary& s : rep1.images) {
    if (!s.attacked) continue;
    std::string stem = fs::path(s.name).stem().string();
    CHECK(fs::exists(out1 / (stem + "_adv.pxr")));
    CHECK(fs::exists(out1 / (stem + "_delta.pxr")));
    CHECK(fs::exists(out1 / (stem + ".json")));
    Image adv = load_image((out1 / (stem + "_adv.pxr")).string());
    CHECK(adv.channels() == 3);
  }

  cfg.output_dir = out2.string();
  CampaignReport rep2 = run_campaign(cfg);
  CHECK(rep1.to_json() == rep2.to_json());
}

TEST_CASE("skip rules exclude misclassified images from the denominator") {
  fs::path out = fresh_dir("pixelrl_camp_skip");
  fs::path labels = out / "labels.txt";
  // wrong label for img_000 forces the misclassified-skip path
  write_file(labels, "img_000 9\nimg_001 1\n");

  std::string fx = fixtures_dir();
  fs::path cfg_path = out / "cfg.json";
  write_file(cfg_path,
             "{ \"task\": \"classify\",\n"
             "  \"victim\": { \"type\": \"tiny_cnn\", \"weights\": \"" + fx +
             "/tiny_cnn.pxw\" },\n"
             "  \"inputs\": [\"" + fx + "/images/img_000.pxr\", \"" + fx +
             "/images/img_001.pxr\"],\n"
             "  \"labels\": \"" + labels.string() + "\",\n"
             "  \"output_dir\": \"" + out.string() + "\",\n"
             "  \"attack\": { \"seed\": 3, \"max_cycles\": 2, "
             "\"max_epochs_per_cycle\": 30 } }");
  CampaignConfig cfg = load_config(cfg_path.string());
  CampaignReport rep = run_campaign(cfg);
  REQUIRE(rep.images.size() == 2);
  CHECK(rep.skipped_images == 1);
  CHECK(rep.attacked_images == 1);
  CHECK_FALSE(rep.images[0].attacked);
  CHECK(rep.images[0].skip_reason.find("misclassified") != std::string::npos);
  CHECK(rep.images[0].queries == 1);  // only the clean query
}

TEST_CASE("missing label skips the image") {
  fs::path out = fresh_dir("pixelrl_camp_nolabel");
  fs::path labels = out / "labels.txt";
  write_file(labels, "img_001 1\n");
  std::string fx = fixtures_dir();
  fs::path cfg_path = out / "cfg.json";
  write_file(cfg_path,
             "{ \"task\": \"classify\",\n"
             "  \"victim\": { \"type\": \"tiny_cnn\", \"weights\": \"" + fx +
             "/tiny_cnn.pxw\" },\n"
             "  \"inputs\": [\"" + fx + "/images/img_000.pxr\"],\n"
             "  \"labels\": \"" + labels.string() + "\",\n"
             "  \"output_dir\": \"" + out.string() + "\" }");
  CampaignConfig cfg = load_config(cfg_path.string());
  CampaignReport rep = run_campaign(cfg);
  REQUIRE(rep.images.size() == 1);
  CHECK(rep.skipped_images == 1);
  CHECK(rep.images[0].skip_reason.find("label") != std::string::npos);
}

TEST_CASE("multi-worker campaign matches single-worker output") {
  fs::path out1 = fresh_dir("pixelrl_camp_w1");
  fs::path out4 = fresh_dir("pixelrl_camp_w4");
  fs::path cfg_path = out1 / "cfg.json";
  write_file(cfg_path, classify_config_json(out1));
  CampaignConfig cfg = load_config(cfg_path.string());
  cfg.attack.max_epochs_per_cycle = 30;
  cfg.attack.max_cycles = 2;
  CampaignReport rep1 = run_campaign(cfg);
  cfg.output_dir = out4.string();
  cfg.workers = 4;
  CampaignReport rep4 = run_campaign(cfg);
  CHECK(rep1.to_json() == rep4.to_json());
}

TEST_CASE("random baseline success rate matches the binomial oracle") {
  // Victim: class flips iff the single sensitive pixel (7, 9) is touched.
  // On a 32x32 image with N = 1 action per epoch, a uniform action hits it
  // with probability 1/1024 per query; over a budget of Q queries the
  // success probability is 1 - (1 - 1/1024)^Q. We run many images with a
  // flat budget and compare against a 4-sigma binomial interval.
  fs::path out = fresh_dir("pixelrl_baseline");
  fs::path imgs = out / "imgs";
  fs::create_directories(imgs);
  const int kImages = 60;
  std::string labels_text;
  for (int i = 0; i < kImages; ++i) {
    Image x(1, 32, 32, 0.5);
    char name[32];
    std::snprintf(name, sizeof(name), "b_%03d", i);
    save_raw(x, (imgs / (std::string(name) + ".pxr")).string());
    labels_text += std::string(name) + " 0\n";
  }
  fs::path labels = out / "labels.txt";
  write_file(labels, labels_text);

  // linear victim: logit0 = 0.2, logit1 = 2*x_p - 1 for pixel p = (7, 9)
  std::vector<std::vector<double>> w(2, std::vector<double>(32 * 32, 0.0));
  w[1][7 * 32 + 9] = 2.0;
  std::vector<double> bias{0.2, -1.0};
  {
    std::vector<Tensor> tensors;
    tensors.push_back({{4}, {1, 32, 32, 2}});
    Tensor wt;
    wt.dims = {2, 1024};
    for (const auto& row : w)
      for (double v : row) wt.data.push_back(v);
    tensors.push_back(wt);
    tensors.push_back({{2}, {0.2, -1.0}});
    save_weights(tensors, (out / "linear.pxw").string());
  }

  CampaignConfig cfg;
  cfg.task = "classify";
  cfg.victim.type = "linear_softmax";
  cfg.victim.weights = (out / "linear.pxw").string();
  cfg.input_dir = imgs.string();
  cfg.labels_path = labels.string();
  cfg.output_dir = out.string();
  cfg.attack.seed = 99;
  cfg.attack.alpha = 0.01;  // N = 1 on 32x32
  cfg.attack.convergence_duration = 1000000;  // never converge early
  cfg.attack.max_epochs_per_cycle = 1000000;
  cfg.attack.max_cycles = 1;
  cfg.baseline_query_budget = 400;
  cfg.write_artifacts = false;

  CampaignReport rep = run_random_baseline(cfg);
  CHECK(rep.attacked_images == kImages);
  double p = 1.0 - std::pow(1.0 - 1.0 / 1024.0, 400.0);
  double sd = std::sqrt(p * (1 - p) / kImages);
  CHECK(rep.success_rate > p - 4 * sd);
  CHECK(rep.success_rate < p + 4 * sd);
  // budget respected per image
  for (const ImageSummary& s : rep.images) {
    CHECK(s.queries <= 400 + 1);  // +1 for the clean query
  }
}

TEST_CASE("per-image victim error becomes a recorded skip") {
  fs::path out = fresh_dir("pixelrl_camp_err");
  std::string fx = fixtures_dir();
  // mismatched victim dims (2x2 linear victim vs 32x32 fixture image)
  std::vector<Tensor> tensors;
  tensors.push_back({{4}, {1, 2, 2, 2}});
  tensors.push_back({{2, 4}, std::vector<double>(8, 0.0)});
  tensors.push_back({{2}, {0.0, 0.0}});
  save_weights(tensors, (out / "mini.pxw").string());
  fs::path labels = out / "labels.txt";
  write_file(labels, "img_000 0\n");
  fs::path cfg_path = out / "cfg.json";
  write_file(cfg_path,
             "{ \"task\": \"classify\",\n"
             "  \"victim\": { \"type\": \"linear_softmax\", \"weights\": \"" +
             (out / "mini.pxw").string() + "\" },\n"
             "  \"inputs\": [\"" + fx + "/images/img_000.pxr\"],\n"
             "  \"labels\": \"" + labels.string() + "\",\n"
             "  \"output_dir\": \"" + out.string() + "\" }");
  CampaignReport rep = run_campaign(load_config(cfg_path.string()));
  REQUIRE(rep.images.size() == 1);
  CHECK_FALSE(rep.images[0].attacked);
  CHECK(rep.images[0].skip_reason.find("error") != std::string::npos);
}

TEST_CASE("detection campaign on the grid fixtures") {
  fs::path out = fresh_dir("pixelrl_camp_det");
  std::string fx = fixtures_dir();
  fs::path cfg_path = out / "cfg.json";
  write_file(cfg_path,
             "{ \"task\": \"detect\",\n"
             "  \"victim\": { \"type\": \"grid_detector\", \"cell_size\": 16,\n"
             "                \"threshold\": 0.5, \"steepness\": 30.0 },\n"
             "  \"inputs\": [\"" + fx + "/det_images/det_00.pxr\", \"" + fx +
             "/det_images/det_01.pxr\"],\n"
             "  \"output_dir\": \"" + out.string() + "\",\n"
             "  \"attack\": { \"seed\": 5, \"alpha\": 0.05, \"max_cycles\": 10,"
             " \"max_epochs_per_cycle\": 60 } }");
  CampaignConfig cfg = load_config(cfg_path.string());
  CampaignReport rep = run_campaign(cfg);
  REQUIRE(rep.images.size() == 2);
  for (const ImageSummary& s : rep.images) {
    CHECK(s.attacked);
    CHECK(s.clean_objects >= 1);
    CHECK(s.adv_objects <= s.clean_objects);
  }
  CHECK(rep.map_clean >= rep.map_adv);
  CHECK(rep.rd == doctest::Approx(rep.map_clean - rep.map_adv).epsilon(1e-12));
}
