// Copyright 2026 The STA Toolkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// vista: command-line front end for the STA toolkit.
//
// Exit codes: 0 success, 1 I/O failure, 2 validation failure (bad input,
// bad flags), 3 internal error.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sta/config.hpp"
#include "sta/ensemble.hpp"
#include "sta/errors.hpp"
#include "sta/evaluation.hpp"
#include "sta/fusion.hpp"
#include "sta/io.hpp"
#include "sta/postprocess.hpp"
#include "sta/sampling.hpp"
#include "sta/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;
constexpr int kExitInternal = 3;

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
};

struct Overrides {
  std::optional<int> top_k, k_noun, k_verb, max_proposals, max_exports;
  std::optional<double> nms_iou, iou_min, ttc_tol, alpha;
  std::optional<double> image_width, image_height;
  std::optional<std::uint64_t> seed;
  std::optional<int> n_examples, n_nouns, n_verbs, gts_per_example, n_sources;
  std::optional<double> box_jitter, label_flip, verb_flip, ttc_noise, drop;
};

void print_warnings(const sta::Diagnostics& diag) {
  for (const auto& w : diag.warnings) std::cerr << "warning: " << w << "\n";
}

sta::RunConfig load_config(const CommonOptions& common, sta::Diagnostics& diag) {
  if (common.config_path.empty()) return {};
  return sta::load_run_config(common.config_path, &diag);
}

fs::path output_dir(const CommonOptions& common) {
  fs::path dir = common.out_dir;
  if (dir.empty()) {
    const char* env = std::getenv("VISTA_OUT_DIR");
    dir = env != nullptr && *env != '\0' ? fs::path(env) : fs::path(".");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw sta::IoError("cannot create output directory '" + dir.string() + "'");
  return dir;
}

template <typename T>
void apply(const std::optional<T>& flag, T& dst) {
  if (flag) dst = *flag;
}

json provenance(const std::string& command, const std::vector<std::string>& inputs,
                const sta::RunConfig& cfg) {
  return json{{"command", command}, {"inputs", inputs}, {"config", sta::run_config_to_json(cfg)}};
}

// ---------------------------------------------------------------- evaluate

int cmd_evaluate(const CommonOptions& common, const Overrides& o, const std::string& gt_path,
                 const std::string& pred_path) {
  sta::Diagnostics diag;
  sta::RunConfig cfg = load_config(common, diag);
  apply(o.top_k, cfg.evaluation.top_k);
  apply(o.iou_min, cfg.evaluation.iou_min);
  apply(o.ttc_tol, cfg.evaluation.ttc_max_error);
  cfg.validate();

  const auto gt = sta::load_ground_truth(gt_path, &diag);
  const auto preds = sta::load_predictions(pred_path, &diag);
  print_warnings(diag);
  if (preds.taxonomy && *preds.taxonomy != gt.taxonomy) {
    throw sta::ValidationError("prediction taxonomy differs from the ground-truth taxonomy");
  }
  const auto report = sta::evaluate(preds, gt.annotations, gt.taxonomy, cfg.evaluation);

  const fs::path dir = output_dir(common);
  json j = sta::report_to_json(report, cfg.evaluation);
  j["provenance"] = provenance("evaluate", {gt_path, pred_path}, cfg);
  const std::string table = sta::format_report_table(report, cfg.evaluation);
  sta::write_text_file(dir / "report.json", j.dump(2) + "\n");
  sta::write_text_file(dir / "report.txt", table);
  std::cout << table;
  return 0;
}

// ------------------------------------------------------------- postprocess

int cmd_postprocess(const CommonOptions& common, const Overrides& o, const std::string& heads_path,
                    const std::string& taxonomy_path, std::string uid) {
  sta::Diagnostics diag;
  sta::RunConfig cfg = load_config(common, diag);
  apply(o.k_noun, cfg.inference.k_noun);
  apply(o.k_verb, cfg.inference.k_verb);
  apply(o.nms_iou, cfg.inference.nms_iou);
  apply(o.max_proposals, cfg.inference.max_proposals);
  apply(o.max_exports, cfg.inference.max_exports);
  apply(o.image_width, cfg.inference.image_width);
  apply(o.image_height, cfg.inference.image_height);
  cfg.validate();
  print_warnings(diag);

  const auto taxonomy = sta::load_taxonomy(taxonomy_path);
  const auto tensors = sta::read_tensor_file(heads_path);
  if (uid.empty()) uid = fs::path(heads_path).stem().string();
  const auto batches = sta::proposals_from_tensors(tensors, taxonomy, uid);

  sta::SubmissionDocument doc;
  doc.predictions.taxonomy = taxonomy;
  std::size_t exported = 0;
  for (const auto& [example, proposals] : batches) {
    auto hyps = sta::run_inference_chain(proposals, taxonomy, cfg.inference);
    exported += hyps.size();
    if (!hyps.empty()) doc.predictions.results[example] = std::move(hyps);
  }
  doc.provenance = provenance("postprocess", {heads_path, taxonomy_path}, cfg);
  const fs::path out = output_dir(common) / "submission.json";
  sta::write_submission(doc, out);
  std::cerr << "postprocess: " << batches.size() << " example(s), " << exported
            << " hypotheses -> " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- ensemble

int cmd_ensemble(const CommonOptions& common, const Overrides& o,
                 const std::vector<std::string>& inputs) {
  sta::Diagnostics diag;
  sta::RunConfig cfg = load_config(common, diag);
  apply(o.iou_min, cfg.ensemble.box_iou_min);
  apply(o.ttc_tol, cfg.ensemble.ttc_tolerance);
  apply(o.alpha, cfg.ensemble.agreement_weight);
  apply(o.max_exports, cfg.ensemble.max_exports);
  cfg.ensemble.n_sources = static_cast<int>(inputs.size());
  cfg.validate();

  std::vector<sta::PredictionSet> sources;
  for (const auto& path : inputs) sources.push_back(sta::load_predictions(path, &diag));
  print_warnings(diag);

  sta::EnsembleStats stats;
  sta::SubmissionDocument doc;
  doc.predictions = sta::ensemble_predictions(sources, cfg.ensemble, &stats);
  doc.provenance = provenance("ensemble", inputs, cfg);
  doc.provenance["stats"] = {{"input_hypotheses", stats.input_hypotheses},
                             {"groups", stats.groups}};
  const fs::path out = output_dir(common) / "ensemble.json";
  sta::write_submission(doc, out);
  std::cerr << "ensemble: " << inputs.size() << " source(s), " << stats.input_hypotheses
            << " hypotheses, " << stats.groups << " group(s) -> " << out.string() << "\n";
  return 0;
}

// ------------------------------------------------------------------- synth

int cmd_synth(const CommonOptions& common, const Overrides& o) {
  sta::Diagnostics diag;
  sta::RunConfig cfg = load_config(common, diag);
  apply(o.seed, cfg.noise.seed);
  apply(o.n_examples, cfg.synth.n_examples);
  apply(o.n_nouns, cfg.synth.n_nouns);
  apply(o.n_verbs, cfg.synth.n_verbs);
  apply(o.gts_per_example, cfg.synth.gts_per_example);
  apply(o.n_sources, cfg.synth.n_sources);
  apply(o.box_jitter, cfg.noise.box_jitter_sigma);
  apply(o.label_flip, cfg.noise.label_flip_prob);
  apply(o.verb_flip, cfg.noise.verb_flip_prob);
  apply(o.ttc_noise, cfg.noise.ttc_noise_sigma);
  apply(o.drop, cfg.noise.drop_prob);
  cfg.validate();
  print_warnings(diag);

  const auto& s = cfg.synth;
  const auto scenario = sta::generate_scenario(s.n_examples, s.n_nouns, s.n_verbs,
                                               s.gts_per_example, cfg.noise.seed);
  const auto sources =
      sta::perturb_to_predictions(scenario.gts, scenario.taxonomy, cfg.noise, s.n_sources);

  const fs::path dir = output_dir(common);
  sta::write_ground_truth({scenario.taxonomy, scenario.gts, std::nullopt}, dir / "gt.json");
  for (std::size_t i = 0; i < sources.size(); ++i) {
    sta::SubmissionDocument doc;
    doc.predictions = sources[i];
    doc.provenance = provenance("synth", {}, cfg);
    doc.provenance["source_index"] = i;
    sta::write_submission(doc, dir / ("pred_" + std::to_string(i) + ".json"));
  }
  std::cerr << "synth: " << scenario.gts.size() << " ground truths, " << sources.size()
            << " source(s) -> " << dir.string() << "\n";
  return 0;
}

// -------------------------------------------------------------------- plan

int cmd_plan(double query_time, int frames, double fps) {
  const auto plan = sta::plan_frames(query_time, frames, fps);
  json j{{"query_time", plan.query_time},
         {"frame_times", plan.frame_times},
         {"sample_rate", plan.sample_rate},
         {"frame_count", plan.frame_count},
         {"short_side", plan.short_side}};
  std::cout << j.dump() << "\n";
  return 0;
}

// --------------------------------------------------------------- fuse-demo

sta::NamedTensors random_fusion_bundle(std::uint64_t seed) {
  sta::CounterRng rng(seed, 0);
  const auto fill = [&](std::vector<std::size_t> shape, double scale) {
    auto t = sta::FeatureTensor::zeros(std::move(shape));
    for (float& v : t.data) v = static_cast<float>(scale * rng.uniform(-1.0, 1.0));
    return t;
  };
  const std::size_t frames = 8, d_in = 32, d_att = 16, d_tok = 24, channels = 8, d_roi = 16,
                    d_proj = 8, hidden = 16, rois = 5;
  sta::NamedTensors b;
  b["sequence"] = fill({frames, d_in}, 1.0);
  b["probe.key_proj"] = fill({d_in, d_att}, 0.3);
  b["probe.value_proj"] = fill({d_in, d_tok}, 0.3);
  b["probe.query"] = fill({d_att}, 1.0);
  b["film.gamma_proj"] = fill({d_tok, channels}, 0.1);
  b["film.gamma_bias"] = fill({channels}, 0.1);
  for (float& v : b["film.gamma_bias"].data) v += 1.0f;
  b["film.beta_proj"] = fill({d_tok, channels}, 0.1);
  b["film.beta_bias"] = fill({channels}, 0.1);
  b["fpn"] = fill({channels, 6, 6}, 1.0);
  b["roi"] = fill({rois, d_roi}, 1.0);
  b["ctx.token_proj"] = fill({d_tok, d_proj}, 0.3);
  b["ctx.token_bias"] = fill({d_proj}, 0.1);
  b["ctx.layer1"] = fill({d_roi + d_proj, hidden}, 0.3);
  b["ctx.layer1_bias"] = fill({hidden}, 0.1);
  b["ctx.layer2"] = fill({hidden, d_roi}, 0.3);
  b["ctx.layer2_bias"] = fill({d_roi}, 0.1);
  return b;
}

int cmd_fuse_demo(const std::string& input, std::uint64_t seed, const std::string& write_bundle) {
  const sta::NamedTensors bundle =
      input.empty() ? random_fusion_bundle(seed) : sta::read_tensor_file(input);
  if (!write_bundle.empty()) sta::write_tensor_file(bundle, write_bundle);

  std::vector<std::string> missing;
  for (const char* name : {"sequence", "fpn", "roi"}) {
    if (!bundle.count(name)) missing.push_back(std::string("missing tensor '") + name + "'");
  }
  if (!missing.empty()) throw sta::ValidationError(std::move(missing));

  const auto probe = sta::probe_params_from_tensors(bundle);
  const auto film = sta::film_params_from_tensors(bundle);
  const auto ctx = sta::context_params_from_tensors(bundle);

  const auto pooled = sta::attentive_probe(bundle.at("sequence"), probe);
  std::printf("probe weights:");
  for (Eigen::Index i = 0; i < pooled.weights.size(); ++i) std::printf(" %.6f", pooled.weights[i]);
  std::printf("\nprobe weight sum: %.9f\n", pooled.weights.sum());

  const auto& fpn = bundle.at("fpn");
  const auto identity = sta::FilmParams<float>::identity(film.token_dim(), film.channels());
  const bool identity_ok = sta::film_modulate(fpn, pooled.token, identity) == fpn;
  std::printf("film identity check: %s\n", identity_ok ? "bit-equal" : "MISMATCH");
  const auto modulated = sta::film_modulate(fpn, pooled.token, film);
  std::printf("film output norm: %.6f (input %.6f)\n", modulated.as_vector().norm(),
              fpn.as_vector().norm());

  const auto fused = sta::roi_context_fuse(bundle.at("roi"), pooled.token, ctx);
  const auto before = bundle.at("roi").as_matrix();
  const auto after = fused.as_matrix();
  for (Eigen::Index r = 0; r < after.rows(); ++r) {
    std::printf("roi %ld: norm %.6f -> %.6f\n", static_cast<long>(r), before.row(r).norm(),
                after.row(r).norm());
  }
  return identity_ok ? 0 : kExitInternal;
}

// ---------------------------------------------------------------- validate

int cmd_validate(const std::string& path, std::string kind) {
  sta::Diagnostics diag;
  if (kind == "auto") {
    const std::string text = sta::read_text_file(path);
    if (text.rfind("VSTF", 0) == 0) {
      kind = "tensor";
    } else {
      const json j = sta::parse_json(text, path);
      if (j.is_object() && j.contains("annotations")) kind = "gt";
      else if (j.is_object() && j.contains("results")) kind = "submission";
      else if (j.is_object() && j.contains("nouns")) kind = "taxonomy";
      else if (j.is_object() && (j.contains("inference") || j.contains("evaluation") ||
                                 j.contains("ensemble") || j.contains("noise") ||
                                 j.contains("synth")))
        kind = "config";
      else throw sta::ValidationError(path + ": cannot tell what kind of document this is");
    }
  }
  std::string summary;
  if (kind == "tensor") {
    const auto t = sta::read_tensor_file(path);
    summary = std::to_string(t.size()) + " tensor(s)";
  } else if (kind == "gt") {
    const auto gt = sta::load_ground_truth(path, &diag);
    summary = std::to_string(gt.annotations.size()) + " annotation(s)";
  } else if (kind == "submission") {
    const auto doc = sta::load_submission(path, &diag);
    summary = std::to_string(doc.predictions.results.size()) + " example(s), " +
              std::to_string(doc.predictions.hypothesis_count()) + " hypotheses";
  } else if (kind == "taxonomy") {
    const auto t = sta::load_taxonomy(path);
    summary = std::to_string(t.noun_count()) + " nouns, " + std::to_string(t.verb_count()) + " verbs";
  } else if (kind == "config") {
    sta::load_run_config(path, &diag);
    summary = "run config";
  } else {
    throw sta::ValidationError("unknown --kind '" + kind + "'");
  }
  print_warnings(diag);
  std::cout << "ok: " << kind << ": " << summary << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Short-term object interaction anticipation toolkit"};
  app.require_subcommand(1);

  CommonOptions common;
  Overrides o;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON run config");
    sub->add_option("--out", common.out_dir, "Output directory (default: $VISTA_OUT_DIR or .)");
  };

  std::string gt_path, pred_path;
  auto* evaluate = app.add_subcommand("evaluate", "Top-5 mAP of predictions against ground truth");
  evaluate->add_option("gt", gt_path, "Ground-truth JSON")->required();
  evaluate->add_option("predictions", pred_path, "Submission JSON")->required();
  evaluate->add_option("--top-k", o.top_k, "Hypotheses scored per example");
  evaluate->add_option("--iou-min", o.iou_min, "IoU must exceed this to match");
  evaluate->add_option("--ttc-tol", o.ttc_tol, "TTC error must be below this (seconds)");
  add_common(evaluate);

  std::string heads_path, taxonomy_path, uid;
  auto* post = app.add_subcommand("postprocess", "Head outputs -> ranked, NMS-filtered submission");
  post->add_option("heads", heads_path, "Tensor container with head outputs")->required();
  post->add_option("--taxonomy", taxonomy_path, "Taxonomy JSON")->required();
  post->add_option("--uid", uid, "Example uid for un-prefixed tensors (default: file stem)");
  post->add_option("--k-noun", o.k_noun, "Nouns expanded per proposal");
  post->add_option("--k-verb", o.k_verb, "Verbs expanded per proposal");
  post->add_option("--nms-iou", o.nms_iou, "Suppression threshold");
  post->add_option("--max-proposals", o.max_proposals, "Proposal cap");
  post->add_option("--max-exports", o.max_exports, "Hypotheses exported per example");
  post->add_option("--image-width", o.image_width, "Clip refined boxes to this width");
  post->add_option("--image-height", o.image_height, "Clip refined boxes to this height");
  add_common(post);

  std::vector<std::string> ensemble_inputs;
  auto* ens = app.add_subcommand("ensemble", "Merge several submissions");
  ens->add_option("predictions", ensemble_inputs, "Submission JSON files")->required();
  ens->add_option("--iou-min", o.iou_min, "Minimum box IoU for grouping");
  ens->add_option("--ttc-tol", o.ttc_tol, "Maximum TTC difference for grouping (seconds)");
  ens->add_option("--alpha", o.alpha, "Weight of cross-source agreement in merged scores");
  ens->add_option("--max-exports", o.max_exports, "Hypotheses kept per example");
  add_common(ens);

  auto* synth = app.add_subcommand("synth", "Seeded synthetic ground truth and noisy sources");
  synth->add_option("--seed", o.seed, "Generator seed");
  synth->add_option("--examples", o.n_examples, "Number of examples");
  synth->add_option("--nouns", o.n_nouns, "Noun vocabulary size");
  synth->add_option("--verbs", o.n_verbs, "Verb vocabulary size");
  synth->add_option("--gts-per-example", o.gts_per_example, "Annotations per example");
  synth->add_option("--sources", o.n_sources, "Prediction sources to emit");
  synth->add_option("--box-jitter", o.box_jitter, "Corner jitter sigma (pixels)");
  synth->add_option("--label-flip", o.label_flip, "Noun flip probability");
  synth->add_option("--verb-flip", o.verb_flip, "Verb flip probability");
  synth->add_option("--ttc-noise", o.ttc_noise, "TTC noise sigma (seconds)");
  synth->add_option("--drop", o.drop, "Drop probability");
  add_common(synth);

  double query_time = 0.0;
  int frames = sta::kClipFrameCount;
  double fps = sta::kClipSampleRate;
  auto* plan = app.add_subcommand("plan", "Frame timestamps sampled for a query time (JSON on stdout)");
  plan->add_option("--time", query_time, "Query timestamp (seconds)")->required();
  plan->add_option("--frames", frames, "Frames per clip");
  plan->add_option("--fps", fps, "Sampling rate");

  std::string fuse_input, write_bundle;
  std::uint64_t fuse_seed = 0;
  auto* fuse = app.add_subcommand("fuse-demo", "Run the fusion kernels on a tensor bundle");
  fuse->add_option("bundle", fuse_input, "Tensor container (default: seeded random bundle)");
  fuse->add_option("--seed", fuse_seed, "Seed for the random bundle");
  fuse->add_option("--write-bundle", write_bundle, "Save the bundle that was used");

  std::string validate_path, kind = "auto";
  auto* validate = app.add_subcommand("validate", "Check a document or tensor file");
  validate->add_option("path", validate_path, "File to check")->required();
  validate->add_option("--kind", kind, "auto|gt|submission|taxonomy|tensor|config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*evaluate) return cmd_evaluate(common, o, gt_path, pred_path);
    if (*post) return cmd_postprocess(common, o, heads_path, taxonomy_path, uid);
    if (*ens) return cmd_ensemble(common, o, ensemble_inputs);
    if (*synth) return cmd_synth(common, o);
    if (*plan) return cmd_plan(query_time, frames, fps);
    if (*fuse) return cmd_fuse_demo(fuse_input, fuse_seed, write_bundle);
    if (*validate) return cmd_validate(validate_path, kind);
  } catch (const sta::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const sta::ValidationError& e) {
    for (const auto& issue : e.issues()) std::cerr << "error: " << issue << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
