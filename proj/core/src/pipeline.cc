// Copyright 2026 The mdlfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mdlfuzz/pipeline.h"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>

#include "mdlfuzz/bridge_client.h"
#include "mdlfuzz/campaign.h"
#include "mdlfuzz/canonical.h"
#include "mdlfuzz/error.h"
#include "mdlfuzz/graph.h"
#include "mdlfuzz/harness.h"
#include "mdlfuzz/ngram.h"
#include "mdlfuzz/parallel.h"
#include "mdlfuzz/subprocess.h"

namespace mdlfuzz {
namespace {

namespace fs = std::filesystem;

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const fs::path& path, std::string_view data) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.close();
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
}

std::string Trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

bool HasMdlExtension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".mdl";
}

std::vector<std::string> ParseCsvLine(std::string_view line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

template <typename Enum>
Enum StatusFromName(std::string_view name, std::initializer_list<Enum> all) {
  for (Enum e : all) {
    if (StatusName(e) == name) return e;
  }
  throw Error(ErrorCode::kInvalidConfig,
              "unknown manifest status '" + std::string(name) + "'");
}

std::size_t ParseCount(std::string_view text) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kInvalidConfig, "not a count: '" + std::string(text) + "'");
  }
  return value;
}

ManifestEntry IngestOne(const fs::path& dir, const fs::path& file,
                        const SimplifyPolicy& policy) {
  ManifestEntry entry;
  entry.path = fs::relative(file, dir).generic_string();
  std::string text;
  try {
    text = ReadFile(file);
  } catch (const Error& e) {
    entry.note = e.what();
    return entry;
  }
  entry.sha256 = Sha256Hex(text);
  entry.tokens_raw = Tokenize(text).size();

  SyntaxTree tree;
  std::vector<Diagnostic> diagnostics;
  try {
    tree = Parse(text, ParseMode::kLenient, &diagnostics);
  } catch (const Error& e) {
    entry.note = e.what();
    return entry;
  }
  entry.parse = diagnostics.empty() ? ParseStatus::kOk : ParseStatus::kRecovered;
  if (!diagnostics.empty()) entry.note = diagnostics.front().message;

  const FlatnessReport flat = CheckFlatNoDeps(tree);
  entry.flatness = flat.flat ? FlatnessStatus::kFlat : FlatnessStatus::kNonFlat;
  if (!flat.flat) {
    entry.note = flat.reasons.front();
    return entry;
  }
  const SimplifyResult simplified = Simplify(tree, policy);
  if (simplified.empty_after_simplify) {
    entry.simplify = SimplifyStatus::kEmpty;
    entry.note = "no blocks after simplification";
    return entry;
  }
  entry.simplify = SimplifyStatus::kOk;
  entry.tokens_simplified = Tokenize(Print(simplified.tree)).size();
  try {
    entry.tokens_canonical = Tokenize(CanonicalizeForTraining(simplified.tree)).size();
  } catch (const Error& e) {
    entry.simplify = SimplifyStatus::kSkipped;
    entry.note = e.what();
  }
  return entry;
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

double ParseDouble(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double d = std::stod(value, &used);
    if (used == value.size()) return d;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kInvalidConfig, key + ": not a number: '" + value + "'");
}

std::uint64_t ParseUnsigned(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw Error(ErrorCode::kInvalidConfig,
                key + ": not a non-negative integer: '" + value + "'");
  }
  return v;
}

// A value may be wrapped in double quotes to keep surrounding spaces.
std::string Unquote(const std::string& value) {
  if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
    return value.substr(1, value.size() - 2);
  }
  return value;
}

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

class StageContext {
 public:
  StageContext(const PipelineConfig& config, std::ostream* log)
      : config_(config), log_(log) {}

  const PipelineConfig& config() const { return config_; }
  fs::path Dir(std::string_view stage) const { return config_.output_dir / stage; }
  fs::path Stamp(std::string_view stage) const { return Dir(stage) / ".stamp"; }

  std::string ReadStamp(std::string_view stage) const {
    std::error_code ec;
    if (!fs::exists(Stamp(stage), ec)) return "";
    return Trim(ReadFile(Stamp(stage)));
  }

  // Fails the stage when its upstream never completed.
  std::string Upstream(std::string_view stage, std::string_view upstream) const {
    std::string stamp = ReadStamp(upstream);
    if (stamp.empty()) {
      throw Error(ErrorCode::kStageFailure,
                  std::string(stage) + ": missing input " + Dir(upstream).string() +
                      " (run stage '" + std::string(upstream) + "' first)");
    }
    return stamp;
  }

  void Log(const std::string& line) const {
    if (log_ != nullptr) *log_ << line << "\n";
  }

 private:
  const PipelineConfig& config_;
  std::ostream* log_;
};

// Recreates an empty stage directory.
void ResetDir(const fs::path& dir) {
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());
}

std::string StemFor(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "sample_%06zu", index);
  return buf;
}

std::vector<fs::path> ListFiles(const fs::path& dir, std::string_view ext) {
  std::vector<fs::path> files;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string IngestFingerprint(const PipelineConfig& cfg) {
  std::ostringstream key;
  key << "ingest\n" << fs::absolute(cfg.corpus_dir).string() << "\n";
  if (cfg.policy_path) key << ReadFile(*cfg.policy_path) << "\n";
  for (const auto& file : ListModelFiles(cfg.corpus_dir)) {
    std::error_code ec;
    const auto size = fs::file_size(file, ec);
    const auto mtime = fs::last_write_time(file, ec).time_since_epoch().count();
    key << fs::relative(file, cfg.corpus_dir).generic_string() << ' ' << size << ' '
        << mtime << "\n";
  }
  return Sha256Hex(key.str());
}

void StageIngest(const StageContext& ctx) {
  const auto& cfg = ctx.config();
  const CorpusManifest manifest = Ingest(cfg.corpus_dir, cfg.LoadPolicy(), cfg.jobs);
  if (manifest.entries.empty()) ctx.Log("warning: no .mdl files in " + cfg.corpus_dir.string());
  WriteFile(ctx.Dir("ingest") / "manifest.csv", manifest.ToCsv());
  WriteFile(ctx.Dir("ingest") / "summary.txt", manifest.Summary());
  ctx.Log("ingest: " + std::to_string(manifest.AcceptedCount()) + " of " +
          std::to_string(manifest.entries.size()) + " models accepted");
}

void StageSimplify(const StageContext& ctx) {
  const auto& cfg = ctx.config();
  const auto manifest =
      CorpusManifest::FromCsv(ReadFile(ctx.Dir("ingest") / "manifest.csv"));
  const SimplifyPolicy policy = cfg.LoadPolicy();
  std::vector<const ManifestEntry*> accepted;
  for (const auto& e : manifest.entries) {
    if (e.Accepted()) accepted.push_back(&e);
  }
  ParallelFor(accepted.size(), cfg.jobs, [&](std::size_t i) {
    const fs::path src = cfg.corpus_dir / accepted[i]->path;
    const SyntaxTree tree = Parse(ReadFile(src), ParseMode::kLenient);
    WriteFile(ctx.Dir("simplify") / accepted[i]->path, Print(Simplify(tree, policy).tree));
  });
  ctx.Log("simplify: " + std::to_string(accepted.size()) + " models");
}

void StageCanon(const StageContext& ctx) {
  const auto& cfg = ctx.config();
  const fs::path in_dir = ctx.Dir("simplify");
  const auto files = ListModelFiles(in_dir);
  ParallelFor(files.size(), cfg.jobs, [&](std::size_t i) {
    const SyntaxTree tree = Parse(ReadFile(files[i]), ParseMode::kLenient);
    WriteFile(ctx.Dir("canon") / fs::relative(files[i], in_dir),
              CanonicalizeForTraining(tree));
  });
  ctx.Log("canon: " + std::to_string(files.size()) + " models");
}

void StageTrain(const StageContext& ctx) {
  const auto& cfg = ctx.config();
  std::vector<TokenSeq> corpus;
  for (const auto& file : ListModelFiles(ctx.Dir("canon"))) {
    corpus.push_back(Tokenize(ReadFile(file)));
  }
  const NGramModel model =
      NGramModel::Train(corpus, cfg.ngram_order, cfg.sampler.eot_token);
  model.Save(ctx.Dir("train") / "ngram.json");
  ctx.Log("train: order " + std::to_string(cfg.ngram_order) + ", " +
          std::to_string(corpus.size()) + " documents, vocabulary " +
          std::to_string(model.vocabulary().size()));
}

void StageSample(const StageContext& ctx) {
  const auto& cfg = ctx.config();
  std::unique_ptr<LanguageBackend> backend;
  std::unique_ptr<NGramModel> model;
  if (cfg.bridge_cmd) {
    backend = std::make_unique<BridgeClient>(SplitCommandLine(*cfg.bridge_cmd));
  } else {
    model = std::make_unique<NGramModel>(NGramModel::Load(ctx.Dir("train") / "ngram.json"));
    backend = std::make_unique<NGramBackend>(*model);
  }
  const std::size_t jobs = backend->ConcurrentSafe() ? cfg.jobs : 1;
  ParallelFor(cfg.samples, jobs, [&](std::size_t i) {
    SamplerConfig sampler = cfg.sampler;
    sampler.rng_seed = cfg.sampler.rng_seed + i;
    const GenerationResult gen = Generate(*backend, sampler);
    WriteFile(ctx.Dir("sample") / (StemFor(i) + ".txt"), gen.text);
  });
  ctx.Log("sample: " + std::to_string(cfg.samples) + " samples");
}

void StageRestore(const StageContext& ctx) {
  const auto& cfg = ctx.config();
  const auto files = ListFiles(ctx.Dir("sample"), ".txt");
  std::vector<std::string> status(files.size());
  ParallelFor(files.size(), cfg.jobs, [&](std::size_t i) {
    const std::string stem = files[i].stem().string();
    try {
      const SyntaxTree restored = Restore(ReadFile(files[i]));
      WriteFile(ctx.Dir("restore") / (stem + ".mdl"), Print(restored));
      status[i] = CsvField(stem) + ",ok,";
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kUnparsableSample) throw;
      status[i] = CsvField(stem) + ",failed," + CsvField(e.what());
    }
  });
  std::string csv = "sample,status,error\n";
  std::size_t ok = 0;
  for (const auto& row : status) {
    csv += row + "\n";
    if (row.find(",ok,") != std::string::npos) ++ok;
  }
  WriteFile(ctx.Dir("restore") / "status.csv", csv);
  ctx.Log("restore: " + std::to_string(ok) + " of " + std::to_string(files.size()) +
          " samples parse");
}

void StageCheck(const StageContext& ctx) {
  const auto& cfg = ctx.config();
  const std::string status = ReadFile(ctx.Dir("restore") / "status.csv");
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(status);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (!line.empty()) rows.push_back(ParseCsvLine(line));
  }
  std::vector<OutcomeRecord> records(rows.size());
  std::vector<std::string> finding_rows(rows.size());
  ParallelFor(rows.size(), cfg.jobs, [&](std::size_t i) {
    const auto& row = rows[i];
    if (row.size() < 3) {
      throw Error(ErrorCode::kStageFailure, "malformed row in restore/status.csv");
    }
    OutcomeRecord& r = records[i];
    if (row[1] != "ok") {
      r.model = (ctx.Dir("sample") / (row[0] + ".txt")).string();
      r.kind = kKindParseFailure;
      r.diag = row[2];
      return;
    }
    const fs::path model_path = ctx.Dir("restore") / (row[0] + ".mdl");
    r.model = model_path.string();
    const auto findings = StaticCheck(Parse(ReadFile(model_path), ParseMode::kLenient));
    for (const auto& f : findings) {
      finding_rows[i] += CsvField(row[0]) + "," +
                         (f.severity == Severity::kError ? "error," : "warning,") +
                         f.rule + "," + CsvField(f.location) + "," +
                         CsvField(f.message) + "\n";
    }
    if (!IsStaticValid(findings)) {
      r.kind = kKindStaticInvalid;
      for (const auto& f : findings) {
        if (f.severity == Severity::kError) {
          r.diag = f.rule + ": " + f.message + " at " + f.location;
          break;
        }
      }
      return;
    }
    if (!cfg.validator_cmd) {
      r.kind = kKindStaticValid;
      return;
    }
    const ValidationOutcome v =
        RunValidator(model_path, *cfg.validator_cmd, cfg.timeout_seconds);
    r.kind = std::string(OutcomeKindName(v.kind));
    if (v.exit_code) r.exit = *v.exit_code;
    if (v.term_signal) r.exit = -*v.term_signal;
    r.diag = v.diag;
    r.ms = static_cast<long long>(v.wall_seconds * 1000.0);
    if (v.kind == OutcomeKind::kCrash || v.kind == OutcomeKind::kTimeout) {
      r.sig = CrashSignature(v);
    }
  });
  std::string jsonl;
  for (const auto& r : records) jsonl += OutcomeRecordToJson(r) + "\n";
  WriteFile(ctx.Dir("check") / "outcomes.jsonl", jsonl);
  std::string findings_csv = "sample,severity,rule,location,message\n";
  for (const auto& rows_of_sample : finding_rows) findings_csv += rows_of_sample;
  WriteFile(ctx.Dir("check") / "findings.csv", findings_csv);
  const CampaignReport report = TallyRecords(records, cfg.validator_cmd.has_value());
  ctx.Log("check: " + std::to_string(report.static_valid) + " of " +
          std::to_string(report.generated) + " samples static-valid");
}

void StageReport(const StageContext& ctx) {
  const auto& cfg = ctx.config();
  const auto records = ReadOutcomeRecords(ctx.Dir("check") / "outcomes.jsonl");
  const CampaignReport report = TallyRecords(records, cfg.validator_cmd.has_value());
  WriteCampaignReport(report, ctx.Dir("report"));

  std::vector<std::pair<std::string, SyntaxTree>> corpus;
  const fs::path simplified = ctx.Dir("simplify");
  for (const auto& file : ListModelFiles(simplified)) {
    corpus.emplace_back(fs::relative(file, simplified).generic_string(),
                        Parse(ReadFile(file), ParseMode::kLenient));
  }
  WriteFile(ctx.Dir("report") / "corpus_metrics.csv", MetricsCsv(corpus));

  std::vector<std::pair<std::string, SyntaxTree>> samples;
  for (const auto& r : records) {
    if (r.kind == kKindParseFailure || r.kind == kKindStaticInvalid) continue;
    samples.emplace_back(fs::path(r.model).stem().string(),
                         Parse(ReadFile(r.model), ParseMode::kLenient));
  }
  WriteFile(ctx.Dir("report") / "sample_metrics.csv", MetricsCsv(samples));
  ctx.Log(CampaignSummary(report));
}

struct StageSpec {
  const char* name;
  const char* upstream;  // nullptr for ingest
  void (*run)(const StageContext&);
};

constexpr StageSpec kStages[] = {
    {"ingest", nullptr, StageIngest},     {"simplify", "ingest", StageSimplify},
    {"canon", "simplify", StageCanon},    {"train", "canon", StageTrain},
    {"sample", "train", StageSample},     {"restore", "sample", StageRestore},
    {"check", "restore", StageCheck},     {"report", "check", StageReport},
};

// Settings that change a stage's output, beyond its upstream stamp.
std::string StageSettings(const PipelineConfig& cfg, std::string_view stage) {
  std::ostringstream s;
  s << stage << "\n";
  if (stage == "simplify" && cfg.policy_path) s << ReadFile(*cfg.policy_path);
  if (stage == "train") s << cfg.ngram_order << "\n" << cfg.sampler.eot_token;
  if (stage == "sample") {
    s << cfg.samples << "\n" << cfg.sampler.seed_text << "\n"
      << cfg.sampler.temperature << "\n" << cfg.sampler.nucleus << "\n"
      << cfg.sampler.max_tokens << "\n" << cfg.sampler.rng_seed << "\n"
      << cfg.sampler.eot_token << "\n" << cfg.bridge_cmd.value_or("");
  }
  if (stage == "check" || stage == "report") {
    s << cfg.validator_cmd.value_or("") << "\n" << cfg.timeout_seconds;
  }
  return s.str();
}

}  // namespace

std::string Sha256Hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIoError, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xf];
  }
  return hex;
}

std::string CanonicalizeForTraining(const SyntaxTree& simplified) {
  const ModelGraph g = BuildGraph(simplified, ParseMode::kLenient);
  const CanonicalDoc doc = BfsRestructure(g);
  return Print(RenameIdentifiers(CanonicalTree(doc), doc.BlockOrder()).tree);
}

std::string_view StatusName(ParseStatus s) {
  switch (s) {
    case ParseStatus::kOk: return "ok";
    case ParseStatus::kRecovered: return "recovered";
    case ParseStatus::kFailed: return "failed";
  }
  return "failed";
}

std::string_view StatusName(FlatnessStatus s) {
  switch (s) {
    case FlatnessStatus::kFlat: return "flat";
    case FlatnessStatus::kNonFlat: return "nonflat";
    case FlatnessStatus::kUnknown: return "unknown";
  }
  return "unknown";
}

std::string_view StatusName(SimplifyStatus s) {
  switch (s) {
    case SimplifyStatus::kOk: return "ok";
    case SimplifyStatus::kEmpty: return "empty";
    case SimplifyStatus::kSkipped: return "skipped";
  }
  return "skipped";
}

std::size_t CorpusManifest::AcceptedCount() const {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [](const ManifestEntry& e) { return e.Accepted(); }));
}

std::string CorpusManifest::ToCsv() const {
  std::ostringstream out;
  out << "path,sha256,parse,flatness,simplify,tokens_raw,tokens_simplified,"
         "tokens_canonical,note\n";
  for (const auto& e : entries) {
    out << CsvField(e.path) << ',' << e.sha256 << ',' << StatusName(e.parse) << ','
        << StatusName(e.flatness) << ',' << StatusName(e.simplify) << ','
        << e.tokens_raw << ',' << e.tokens_simplified << ',' << e.tokens_canonical
        << ',' << CsvField(e.note) << "\n";
  }
  return out.str();
}

CorpusManifest CorpusManifest::FromCsv(std::string_view csv) {
  CorpusManifest manifest;
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line) || line.rfind("path,sha256,", 0) != 0) {
    throw Error(ErrorCode::kInvalidConfig, "manifest lacks its header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = ParseCsvLine(line);
    if (f.size() != 9) {
      throw Error(ErrorCode::kInvalidConfig, "manifest row with " +
                                                 std::to_string(f.size()) + " fields");
    }
    ManifestEntry e;
    e.path = f[0];
    e.sha256 = f[1];
    e.parse = StatusFromName(f[2], {ParseStatus::kOk, ParseStatus::kRecovered,
                                    ParseStatus::kFailed});
    e.flatness = StatusFromName(f[3], {FlatnessStatus::kFlat, FlatnessStatus::kNonFlat,
                                       FlatnessStatus::kUnknown});
    e.simplify = StatusFromName(f[4], {SimplifyStatus::kOk, SimplifyStatus::kEmpty,
                                       SimplifyStatus::kSkipped});
    e.tokens_raw = ParseCount(f[5]);
    e.tokens_simplified = ParseCount(f[6]);
    e.tokens_canonical = ParseCount(f[7]);
    e.note = f[8];
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

std::string CorpusManifest::Summary() const {
  std::size_t failed = 0, nonflat = 0, empty = 0;
  std::size_t raw = 0, simplified = 0, canonical = 0;
  for (const auto& e : entries) {
    if (e.parse == ParseStatus::kFailed) ++failed;
    if (e.flatness == FlatnessStatus::kNonFlat) ++nonflat;
    if (e.simplify == SimplifyStatus::kEmpty) ++empty;
    if (e.Accepted()) {
      raw += e.tokens_raw;
      simplified += e.tokens_simplified;
      canonical += e.tokens_canonical;
    }
  }
  auto pct = [raw](std::size_t after) {
    if (raw == 0) return std::string("n/a");
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f%%",
                  100.0 * (1.0 - static_cast<double>(after) / static_cast<double>(raw)));
    return std::string(buf);
  };
  std::ostringstream out;
  out << "files              " << entries.size() << "\n"
      << "accepted           " << AcceptedCount() << "\n"
      << "parse-failed       " << failed << "\n"
      << "nonflat            " << nonflat << "\n"
      << "empty-after-simpl  " << empty << "\n"
      << "tokens raw         " << raw << "\n"
      << "tokens simplified  " << simplified << " (" << pct(simplified) << " fewer)\n"
      << "tokens canonical   " << canonical << " (" << pct(canonical) << " fewer)\n";
  return out.str();
}

std::vector<fs::path> ListModelFiles(const fs::path& dir) {
  std::vector<fs::path> files;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return files;
  for (auto it = fs::recursive_directory_iterator(dir, ec);
       !ec && it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (it->is_regular_file(ec) && HasMdlExtension(it->path())) files.push_back(it->path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

CorpusManifest Ingest(const fs::path& dir, const SimplifyPolicy& policy,
                      std::size_t jobs) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorCode::kDirectoryNotFound, dir.string());
  }
  const auto files = ListModelFiles(dir);
  CorpusManifest manifest;
  manifest.entries.resize(files.size());
  ParallelFor(files.size(), jobs, [&](std::size_t i) {
    manifest.entries[i] = IngestOne(dir, files[i], policy);
  });
  return manifest;
}

std::string MetricsCsv(const std::vector<std::pair<std::string, SyntaxTree>>& models) {
  std::string csv(kMetricsCsvHeader);
  csv += "\n";
  for (const auto& [name, tree] : models) {
    const ModelGraph g = BuildGraph(tree, ParseMode::kLenient);
    csv += MetricsCsvRow(name, ComputeMetrics(g));
    csv += "\n";
  }
  return csv;
}

PipelineConfig PipelineConfig::FromText(std::string_view text, const fs::path& base_dir) {
  PipelineConfig cfg;
  auto resolve = [&](const std::string& value) {
    const fs::path p(value);
    return p.is_absolute() ? p : base_dir / p;
  };
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = Trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidConfig,
                  "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = Trim(std::string_view(trimmed).substr(0, eq));
    const std::string value = Unquote(Trim(std::string_view(trimmed).substr(eq + 1)));
    if (key == "corpus_dir") {
      cfg.corpus_dir = resolve(value);
    } else if (key == "output_dir") {
      cfg.output_dir = resolve(value);
    } else if (key == "policy") {
      cfg.policy_path = resolve(value);
    } else if (key == "ngram_order") {
      cfg.ngram_order = static_cast<int>(ParseUnsigned(key, value));
    } else if (key == "samples") {
      cfg.samples = ParseUnsigned(key, value);
    } else if (key == "seed_text") {
      cfg.sampler.seed_text = value;
    } else if (key == "temperature") {
      cfg.sampler.temperature = ParseDouble(key, value);
    } else if (key == "nucleus") {
      cfg.sampler.nucleus = ParseDouble(key, value);
    } else if (key == "max_tokens") {
      cfg.sampler.max_tokens = ParseUnsigned(key, value);
    } else if (key == "rng_seed") {
      cfg.sampler.rng_seed = ParseUnsigned(key, value);
    } else if (key == "eot_token") {
      cfg.sampler.eot_token = value;
    } else if (key == "bridge_cmd") {
      cfg.bridge_cmd = value;
    } else if (key == "validator_cmd") {
      cfg.validator_cmd = value;
    } else if (key == "timeout") {
      cfg.timeout_seconds = ParseDouble(key, value);
    } else if (key == "jobs") {
      cfg.jobs = ParseUnsigned(key, value);
    } else {
      throw Error(ErrorCode::kInvalidConfig,
                  "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  return cfg;
}

PipelineConfig PipelineConfig::FromFile(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kInvalidConfig, "config file not found: " + path.string());
  }
  return FromText(ReadFile(path), path.parent_path().empty() ? fs::path(".")
                                                             : path.parent_path());
}

void PipelineConfig::Validate() const {
  sampler.Validate();
  if (ngram_order < 1) throw Error(ErrorCode::kInvalidConfig, "ngram_order must be >= 1");
  if (timeout_seconds <= 0.0) throw Error(ErrorCode::kInvalidConfig, "timeout must be > 0");
  if (validator_cmd && validator_cmd->find("{model}") == std::string::npos) {
    throw Error(ErrorCode::kInvalidConfig, "validator_cmd lacks the {model} placeholder");
  }
  std::error_code ec;
  if (corpus_dir.empty() || !fs::is_directory(corpus_dir, ec)) {
    throw Error(ErrorCode::kDirectoryNotFound,
                "corpus_dir '" + corpus_dir.string() + "' does not exist");
  }
  if (policy_path && !fs::is_regular_file(*policy_path, ec)) {
    throw Error(ErrorCode::kInvalidConfig,
                "policy file '" + policy_path->string() + "' does not exist");
  }
}

SimplifyPolicy PipelineConfig::LoadPolicy() const {
  return policy_path ? SimplifyPolicy::FromConfigFile(*policy_path)
                     : SimplifyPolicy::Defaults();
}

std::vector<StageRun> RunPipeline(const PipelineConfig& config,
                                  const PipelineOptions& options) {
  config.Validate();
  for (const auto& requested : options.stages) {
    const bool known = std::any_of(std::begin(kStages), std::end(kStages),
                                   [&](const StageSpec& s) { return requested == s.name; });
    if (!known) throw Error(ErrorCode::kInvalidConfig, "unknown stage '" + requested + "'");
  }
  StageContext ctx(config, options.log);
  std::vector<StageRun> runs;
  for (const StageSpec& stage : kStages) {
    if (!options.stages.empty() &&
        std::find(options.stages.begin(), options.stages.end(), stage.name) ==
            options.stages.end()) {
      continue;
    }
    const auto start = Clock::now();
    const std::string input = stage.upstream == nullptr
                                  ? IngestFingerprint(config)
                                  : ctx.Upstream(stage.name, stage.upstream);
    const std::string fingerprint =
        Sha256Hex(input + "\n" + StageSettings(config, stage.name));
    StageRun run{stage.name, false, 0.0};
    if (!options.force && ctx.ReadStamp(stage.name) == fingerprint) {
      run.skipped = true;
      ctx.Log(std::string(stage.name) + ": up to date");
    } else {
      ResetDir(ctx.Dir(stage.name));
      try {
        stage.run(ctx);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kStageFailure) throw;
        throw Error(ErrorCode::kStageFailure,
                    std::string(stage.name) + " failed (" + ctx.Dir(stage.name).string() +
                        "): " + e.what());
      }
      WriteFile(ctx.Stamp(stage.name), fingerprint + "\n");
    }
    run.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    runs.push_back(run);
  }
  return runs;
}

}  // namespace mdlfuzz
