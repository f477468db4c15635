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

#include "sta/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "sta/errors.hpp"

namespace sta {

using nlohmann::json;

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path.string() + "'");
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("error while writing '" + path.string() + "'");
}

json parse_json(std::string_view text, const std::string& origin) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ValidationError(origin + ":" + std::to_string(line) + ":" + std::to_string(column) +
                          ": JSON parse error: " + e.what());
  }
}

namespace {

// Collects every problem in a document before failing.
class Checker {
 public:
  explicit Checker(std::string origin) : origin_(std::move(origin)) {}

  void issue(const std::string& where, const std::string& what) {
    issues_.push_back(origin_ + ": " + where + ": " + what);
  }
  void warn(Diagnostics* diag, const std::string& where, const std::string& what) {
    if (diag) diag->warnings.push_back(origin_ + ": " + where + ": " + what);
  }
  bool ok() const { return issues_.empty(); }
  void throw_if_failed() {
    if (!issues_.empty()) throw ValidationError(std::move(issues_));
  }

  std::optional<double> number(const json& obj, const char* key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
      issue(where, std::string("missing '") + key + "'");
      return std::nullopt;
    }
    if (!it->is_number()) {
      issue(where, std::string("'") + key + "' must be a number");
      return std::nullopt;
    }
    const double v = it->get<double>();
    if (!std::isfinite(v)) {
      issue(where, std::string("'") + key + "' must be finite");
      return std::nullopt;
    }
    return v;
  }

  std::optional<std::int64_t> integer(const json& obj, const char* key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
      issue(where, std::string("missing '") + key + "'");
      return std::nullopt;
    }
    if (!it->is_number_integer()) {
      issue(where, std::string("'") + key + "' must be an integer");
      return std::nullopt;
    }
    return it->get<std::int64_t>();
  }

  std::optional<Box2D> box(const json& obj, const std::string& where) {
    const auto it = obj.find("box");
    if (it == obj.end()) {
      issue(where, "missing 'box'");
      return std::nullopt;
    }
    if (!it->is_array() || it->size() != 4 ||
        !std::all_of(it->begin(), it->end(), [](const json& v) { return v.is_number(); })) {
      issue(where, "'box' must be an array of 4 numbers");
      return std::nullopt;
    }
    const Box2D b{(*it)[0].get<double>(), (*it)[1].get<double>(), (*it)[2].get<double>(),
                  (*it)[3].get<double>()};
    if (!is_valid(b)) {
      issue(where, "invalid box " + describe(b) + " (need finite corners, x1<=x2, y1<=y2)");
      return std::nullopt;
    }
    return b;
  }

  void unknown_keys(const json& obj, std::initializer_list<const char*> known,
                    const std::string& where, Diagnostics* diag) {
    for (const auto& [key, value] : obj.items()) {
      if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
        warn(diag, where, "ignoring unknown field '" + key + "'");
      }
    }
  }

 private:
  std::string origin_;
  std::vector<std::string> issues_;
};

std::optional<CategoryId> category(Checker& check, const json& obj, const char* key,
                                   const std::string& where, std::size_t vocab) {
  const auto v = check.integer(obj, key, where);
  if (!v) return std::nullopt;
  if (*v < 0 || (vocab > 0 && static_cast<std::size_t>(*v) >= vocab)) {
    check.issue(where, std::string("'") + key + "' = " + std::to_string(*v) +
                           " outside vocabulary of size " + std::to_string(vocab));
    return std::nullopt;
  }
  return static_cast<CategoryId>(*v);
}

json box_to_json(const Box2D& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

Taxonomy taxonomy_from_json(const json& j) {
  std::vector<std::string> issues;
  Taxonomy t;
  if (!j.is_object()) throw ValidationError("taxonomy must be a JSON object");
  for (const char* key : {"nouns", "verbs"}) {
    auto& dst = std::string_view(key) == "nouns" ? t.nouns : t.verbs;
    const auto it = j.find(key);
    if (it == j.end() || !it->is_array()) {
      issues.push_back(std::string("taxonomy: '") + key + "' must be an array of strings");
      continue;
    }
    for (const auto& v : *it) {
      if (!v.is_string()) {
        issues.push_back(std::string("taxonomy: '") + key + "' entries must be strings");
        break;
      }
      dst.push_back(v.get<std::string>());
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  t.validate();
  return t;
}

json taxonomy_to_json(const Taxonomy& taxonomy) {
  return json{{"nouns", taxonomy.nouns}, {"verbs", taxonomy.verbs}};
}

Taxonomy load_taxonomy(const std::filesystem::path& path) {
  return taxonomy_from_json(parse_json(read_text_file(path), path.string()));
}

void write_taxonomy(const Taxonomy& taxonomy, const std::filesystem::path& path) {
  write_text_file(path, dump(taxonomy_to_json(taxonomy)));
}

GroundTruthDocument parse_ground_truth(std::string_view text, const std::string& origin,
                                       const std::filesystem::path& base_dir,
                                       Diagnostics* diag) {
  const json root = parse_json(text, origin);
  if (!root.is_object()) throw ValidationError(origin + ": ground truth must be a JSON object");
  Checker check(origin);
  check.unknown_keys(root, {"taxonomy", "taxonomy_path", "annotations"}, "document", diag);

  GroundTruthDocument doc;
  if (const auto it = root.find("taxonomy"); it != root.end()) {
    doc.taxonomy = taxonomy_from_json(*it);
  } else if (const auto p = root.find("taxonomy_path"); p != root.end() && p->is_string()) {
    doc.taxonomy_path = p->get<std::string>();
    std::filesystem::path tax_path(*doc.taxonomy_path);
    if (tax_path.is_relative()) tax_path = base_dir / tax_path;
    doc.taxonomy = load_taxonomy(tax_path);
  } else {
    throw ValidationError(origin + ": need an inline 'taxonomy' or a 'taxonomy_path'");
  }

  const auto ann = root.find("annotations");
  if (ann == root.end() || !ann->is_array()) {
    throw ValidationError(origin + ": 'annotations' must be an array");
  }
  std::set<std::tuple<std::string, double, double, double, double, CategoryId, CategoryId, double>>
      seen;
  for (std::size_t i = 0; i < ann->size(); ++i) {
    const json& a = (*ann)[i];
    std::string where = "annotation " + std::to_string(i);
    if (!a.is_object()) {
      check.issue(where, "must be an object");
      continue;
    }
    const auto uid_it = a.find("uid");
    if (uid_it == a.end() || !uid_it->is_string() || uid_it->get<std::string>().empty()) {
      check.issue(where, "'uid' must be a non-empty string");
      continue;
    }
    GroundTruthInstance gt;
    gt.example_uid = uid_it->get<std::string>();
    where += " (uid '" + gt.example_uid + "')";
    check.unknown_keys(a, {"uid", "box", "noun_category_id", "verb_category_id", "time_to_contact"},
                       where, diag);
    const auto box = check.box(a, where);
    const auto noun = category(check, a, "noun_category_id", where, doc.taxonomy.noun_count());
    const auto verb = category(check, a, "verb_category_id", where, doc.taxonomy.verb_count());
    const auto ttc = check.number(a, "time_to_contact", where);
    if (ttc && *ttc < 0.0) check.issue(where, "'time_to_contact' must be >= 0");
    if (!box || !noun || !verb || !ttc || *ttc < 0.0) continue;
    gt.box = *box;
    gt.noun_id = *noun;
    gt.verb_id = *verb;
    gt.ttc = *ttc;
    if (!seen.emplace(gt.example_uid, gt.box.x1, gt.box.y1, gt.box.x2, gt.box.y2, gt.noun_id,
                      gt.verb_id, gt.ttc)
             .second) {
      check.issue(where, "duplicate annotation");
      continue;
    }
    doc.annotations.push_back(std::move(gt));
  }
  check.throw_if_failed();
  return doc;
}

GroundTruthDocument load_ground_truth(const std::filesystem::path& path, Diagnostics* diag) {
  return parse_ground_truth(read_text_file(path), path.string(), path.parent_path(), diag);
}

std::string dump_ground_truth(const GroundTruthDocument& doc) {
  json root;
  if (doc.taxonomy_path) {
    root["taxonomy_path"] = *doc.taxonomy_path;
  } else {
    root["taxonomy"] = taxonomy_to_json(doc.taxonomy);
  }
  json ann = json::array();
  for (const auto& gt : doc.annotations) {
    ann.push_back({{"uid", gt.example_uid},
                   {"box", box_to_json(gt.box)},
                   {"noun_category_id", gt.noun_id},
                   {"verb_category_id", gt.verb_id},
                   {"time_to_contact", gt.ttc}});
  }
  root["annotations"] = std::move(ann);
  return dump(root);
}

void write_ground_truth(const GroundTruthDocument& doc, const std::filesystem::path& path) {
  write_text_file(path, dump_ground_truth(doc));
}

SubmissionDocument parse_submission(std::string_view text, const std::string& origin,
                                    Diagnostics* diag, std::size_t max_per_example) {
  const json root = parse_json(text, origin);
  if (!root.is_object()) throw ValidationError(origin + ": submission must be a JSON object");
  Checker check(origin);
  check.unknown_keys(root, {"version", "challenge", "results", "taxonomy", "provenance"},
                     "document", diag);

  SubmissionDocument doc;
  if (const auto it = root.find("version"); it != root.end() && it->is_string()) {
    doc.version = it->get<std::string>();
  } else {
    check.issue("document", "'version' must be a string");
  }
  if (const auto it = root.find("challenge");
      it == root.end() || !it->is_string() || it->get<std::string>() != kChallengeName) {
    check.issue("document", "'challenge' must be \"" + std::string(kChallengeName) + "\"");
  }
  if (const auto it = root.find("taxonomy"); it != root.end()) {
    doc.predictions.taxonomy = taxonomy_from_json(*it);
  }
  if (const auto it = root.find("provenance"); it != root.end()) doc.provenance = *it;

  const std::size_t n_nouns =
      doc.predictions.taxonomy ? doc.predictions.taxonomy->noun_count() : 0;
  const std::size_t n_verbs =
      doc.predictions.taxonomy ? doc.predictions.taxonomy->verb_count() : 0;

  const auto results = root.find("results");
  if (results == root.end() || !results->is_object()) {
    check.issue("document", "'results' must be an object keyed by example uid");
    check.throw_if_failed();
  }
  for (const auto& [uid, list] : results->items()) {
    const std::string ex = "results['" + uid + "']";
    if (uid.empty()) check.issue(ex, "empty example uid");
    if (!list.is_array()) {
      check.issue(ex, "must be an array");
      continue;
    }
    if (list.size() > max_per_example) {
      check.issue(ex, std::to_string(list.size()) + " hypotheses exceed the cap of " +
                          std::to_string(max_per_example));
    }
    auto& hyps = doc.predictions.results[uid];
    for (std::size_t i = 0; i < list.size(); ++i) {
      const json& e = list[i];
      const std::string where = ex + "[" + std::to_string(i) + "]";
      if (!e.is_object()) {
        check.issue(where, "must be an object");
        continue;
      }
      check.unknown_keys(e,
                         {"box", "noun_category_id", "verb_category_id", "time_to_contact",
                          "score", "source_id"},
                         where, diag);
      const auto box = check.box(e, where);
      const auto noun = category(check, e, "noun_category_id", where, n_nouns);
      const auto verb = category(check, e, "verb_category_id", where, n_verbs);
      const auto ttc = check.number(e, "time_to_contact", where);
      const auto score = check.number(e, "score", where);
      std::optional<std::int64_t> source;
      if (e.contains("source_id")) {
        source = check.integer(e, "source_id", where);
        if (!source) continue;
      }
      bool ok = box && noun && verb && ttc && score;
      if (ttc && *ttc < 0.0) {
        check.issue(where, "'time_to_contact' must be >= 0");
        ok = false;
      }
      if (score && *score <= 0.0) {
        check.issue(where, "'score' must be > 0");
        ok = false;
      }
      if (!ok) continue;
      hyps.push_back({*box, *noun, *verb, *ttc, *score, source});
    }
  }
  check.throw_if_failed();
  doc.predictions.sort_all();
  return doc;
}

SubmissionDocument load_submission(const std::filesystem::path& path, Diagnostics* diag,
                                   std::size_t max_per_example) {
  return parse_submission(read_text_file(path), path.string(), diag, max_per_example);
}

PredictionSet load_predictions(const std::filesystem::path& path, Diagnostics* diag) {
  return load_submission(path, diag).predictions;
}

std::string dump_submission(const SubmissionDocument& doc) {
  json results = json::object();
  for (const auto& [uid, hyps] : doc.predictions.results) {
    std::vector<StaHypothesis> sorted = hyps;
    sort_canonical(sorted);
    json list = json::array();
    for (const auto& h : sorted) {
      json e{{"box", box_to_json(h.box)},
             {"noun_category_id", h.noun_id},
             {"verb_category_id", h.verb_id},
             {"time_to_contact", h.ttc},
             {"score", h.score}};
      if (h.source_id) e["source_id"] = *h.source_id;
      list.push_back(std::move(e));
    }
    results[uid] = std::move(list);
  }
  json root{{"version", doc.version}, {"challenge", kChallengeName}, {"results", std::move(results)}};
  if (doc.predictions.taxonomy) root["taxonomy"] = taxonomy_to_json(*doc.predictions.taxonomy);
  if (!doc.provenance.is_null()) root["provenance"] = doc.provenance;
  return dump(root);
}

void write_submission(const SubmissionDocument& doc, const std::filesystem::path& path) {
  write_text_file(path, dump_submission(doc));
}

void write_submission(const PredictionSet& preds, const std::filesystem::path& path) {
  SubmissionDocument doc;
  doc.predictions = preds;
  write_submission(doc, path);
}

namespace {

constexpr char kMagic[4] = {'V', 'S', 'T', 'F'};
constexpr std::uint32_t kMaxRank = 16;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }

  std::string_view take(std::size_t n, const char* what) {
    if (remaining() < n) {
      throw ValidationError(std::string("tensor file truncated while reading ") + what +
                            " at byte " + std::to_string(pos_));
    }
    const auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::uint64_t uint(std::size_t width, const char* what) {
    const auto raw = take(width, what);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(raw[i])) << (8 * i);
    }
    return v;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_tensors(const NamedTensors& tensors) {
  std::string out(kMagic, 4);
  put_u32(out, kTensorFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    t.validate(name);
    if (t.rank() > kMaxRank) throw ValidationError(name + ": rank exceeds " + std::to_string(kMaxRank));
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape) put_u64(out, d);
    for (float f : t.data) put_u32(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

NamedTensors decode_tensors(std::string_view bytes) {
  ByteReader in(bytes);
  if (in.remaining() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ValidationError("tensor file: bad magic (expected \"VSTF\")");
  }
  in.take(4, "magic");
  const auto version = in.uint(4, "version");
  if (version != kTensorFormatVersion) {
    throw ValidationError("tensor file: unsupported version " + std::to_string(version));
  }
  const auto count = in.uint(4, "tensor count");
  NamedTensors out;
  for (std::uint64_t k = 0; k < count; ++k) {
    const auto name_len = in.uint(4, "name length");
    std::string name(in.take(name_len, "name"));
    const auto rank = in.uint(4, "rank");
    if (rank > kMaxRank) {
      throw ValidationError("tensor file: '" + name + "' has rank " + std::to_string(rank));
    }
    FeatureTensor t;
    for (std::uint64_t r = 0; r < rank; ++r) {
      const auto d = in.uint(8, "dims");
      if (d > std::numeric_limits<std::size_t>::max()) {
        throw ValidationError("tensor file: dimension too large");
      }
      t.shape.push_back(static_cast<std::size_t>(d));
    }
    const std::size_t n = checked_numel(t.shape);
    if (n > in.remaining() / 4) {
      throw ValidationError("tensor file truncated: '" + name + "' needs " + std::to_string(n) +
                            " floats");
    }
    const auto raw = in.take(n * 4, "data");
    t.data.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t u = 0;
      for (std::size_t b = 0; b < 4; ++b) {
        u |= static_cast<std::uint32_t>(static_cast<unsigned char>(raw[4 * i + b])) << (8 * b);
      }
      t.data[i] = std::bit_cast<float>(u);
    }
    t.validate("tensor file: '" + name + "'");
    if (!out.emplace(std::move(name), std::move(t)).second) {
      throw ValidationError("tensor file: duplicate tensor name");
    }
  }
  if (in.remaining() != 0) {
    throw ValidationError("tensor file: " + std::to_string(in.remaining()) + " trailing bytes");
  }
  return out;
}

NamedTensors read_tensor_file(const std::filesystem::path& path) {
  try {
    return decode_tensors(read_text_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_tensor_file(const NamedTensors& tensors, const std::filesystem::path& path) {
  write_text_file(path, encode_tensors(tensors));
}

json report_to_json(const EvalReport& report, const EvalConfig& cfg) {
  static constexpr std::array<const char*, 4> keys = {"noun", "noun_verb", "noun_ttc", "overall"};
  json map;
  json per_noun = json::object();
  json counts = json::object();
  for (MatchVariant v : kAllVariants) {
    const auto i = index_of(v);
    map[keys[i]] = report.map(v);
    counts[keys[i]] = {{"true_positives", report.counts[i].true_positives},
                       {"false_positives", report.counts[i].false_positives},
                       {"missed", report.counts[i].missed}};
  }
  for (const auto& [noun, aps] : report.per_noun_ap) {
    json entry;
    for (MatchVariant v : kAllVariants) entry[keys[index_of(v)]] = aps[index_of(v)];
    per_noun[std::to_string(noun)] = std::move(entry);
  }
  return json{{"metric", "top_k_map"},
              {"aggregation", "per-example top-k truncation before class-wise AP (local stand-in)"},
              {"config",
               {{"iou_min", cfg.iou_min}, {"ttc_max_error", cfg.ttc_max_error}, {"top_k", cfg.top_k}}},
              {"map_percent", std::move(map)},
              {"per_noun_ap", std::move(per_noun)},
              {"counts", std::move(counts)},
              {"ground_truths", report.ground_truths},
              {"predictions_scored", report.predictions_scored}};
}

}  // namespace sta
