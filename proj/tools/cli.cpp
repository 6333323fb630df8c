#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>

#include <CLI11.hpp>

#include "vtd/classify.hpp"
#include "vtd/detect.hpp"
#include "vtd/error.hpp"
#include "vtd/eval.hpp"
#include "vtd/features.hpp"
#include "vtd/ingest.hpp"
#include "vtd/pipeline.hpp"
#include "vtd/plot.hpp"
#include "vtd/synth.hpp"
#include "vtd/text.hpp"

namespace vtd::cli {
namespace {

namespace fs = std::filesystem;

// Flags shared by every subcommand that runs part of the pipeline. Values
// are applied on top of the --config file, so flags win.
struct PipelineFlags {
  std::string config;
  std::vector<std::string> sets;
  double low_hz = 0, high_hz = 0, t_rr = 0, coef = 0;
  int order = 0;
  std::string detrend;
  bool invert = false;
  std::uint64_t seed = 0;
  std::map<std::string, CLI::Option*> opts;

  void add_to(CLI::App* app, bool filter_flags, bool detect_flags, bool seed_flag) {
    app->add_option("--config", config, "key = value file applied before the flags")->check(CLI::ExistingFile);
    app->add_option("--set", sets, "override one config key, e.g. --set knn_k=3 (repeatable)");
    if (filter_flags) {
      opts["low"] = app->add_option("--low-hz", low_hz, "bandpass low cutoff (Hz)");
      opts["high"] = app->add_option("--high-hz", high_hz, "bandpass high cutoff (Hz)");
      opts["order"] = app->add_option("--order", order, "Butterworth prototype order (2, 4 or 8)");
      opts["detrend"] = app->add_option("--detrend", detrend, "baseline removal before the bandpass")
                            ->check(CLI::IsMember({"none", "median"}));
    }
    if (detect_flags) {
      opts["invert"] = app->add_flag("--invert", invert, "detect on the negated signal (negative R waves)");
      opts["coef"] = app->add_option("--threshold-coef", coef, "Th_R = coef * mean(window maxima)");
      opts["t_rr"] = app->add_option("--t-rr", t_rr, "window length for the maxima (s)");
    }
    if (seed_flag) opts["seed"] = app->add_option("--seed", seed, "seed for splits and learners");
  }

  bool given(const std::string& key) const {
    const auto it = opts.find(key);
    return it != opts.end() && it->second->count() > 0;
  }

  pipeline::PipelineConfig resolve() const {
    pipeline::PipelineConfig cfg;
    if (!config.empty()) pipeline::apply_config_text(cfg, text::read_file(config));
    std::string overrides;
    for (const std::string& s : sets) overrides += s + "\n";
    if (!overrides.empty()) pipeline::apply_config_text(cfg, overrides);
    if (given("low")) cfg.low_hz = low_hz;
    if (given("high")) cfg.high_hz = high_hz;
    if (given("order")) cfg.order = order;
    if (given("detrend")) cfg.detrend = detrend == "median" ? pipeline::DetrendMode::Median : pipeline::DetrendMode::None;
    if (given("invert")) cfg.detector.invert = invert;
    if (given("coef")) cfg.detector.threshold_coef = coef;
    if (given("t_rr")) cfg.detector.t_rr_assumed_s = t_rr;
    if (given("seed")) pipeline::set_seed(cfg, seed);
    cfg.validate();
    return cfg;
  }
};

synth::ClassMix parse_mix(const std::string& text) {
  const auto parts = text::split(text, ',');
  if (parts.size() != 3) throw Error(ErrorCode::BadProportions, "--mix needs three comma-separated proportions");
  synth::ClassMix mix{};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto v = text::parse_double(text::trim(parts[i]));
    if (!v) throw Error(ErrorCode::BadProportions, "'" + std::string(parts[i]) + "' is not a number");
    mix[i] = *v;
  }
  return mix;
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create directory '" + dir.string() + "'");
}

void write_out(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) make_dirs(path.parent_path());
  text::write_file_atomic(path, contents);
}

EcgRecord load_record(const fs::path& path) {
  if (path.extension() == ".hea") return ingest::read_wfdb_record(path);
  return ingest::read_csv_record(text::read_file(path));
}

struct CorpusFlags {
  std::size_t n = 60;
  std::string mix = "0.4,0.3,0.3";
  std::uint64_t seed = 7;
  double fs = 250.0;
  double snr_db = 0.0;
  double baseline_mv = 0.0;
  double powerline_mv = 0.0;
  double sustained_s = 30.0;
  std::string prefix = "syn";
  CLI::Option* snr = nullptr;

  void add_to(CLI::App* app) {
    app->add_option("--n", n, "number of records")->check(CLI::PositiveNumber);
    app->add_option("--mix", mix, "NonVT,SustainedVT,NonSustainedVT proportions");
    app->add_option("--seed", seed, "corpus seed");
    app->add_option("--fs", fs, "sampling rate (Hz)");
    snr = app->add_option("--snr-db", snr_db, "add white noise at this SNR");
    app->add_option("--baseline-mv", baseline_mv, "baseline wander amplitude (mV)");
    app->add_option("--powerline-mv", powerline_mv, "powerline interference amplitude (mV)");
    app->add_option("--sustained-s", sustained_s, "sustained VT boundary (s)");
    app->add_option("--prefix", prefix, "record id prefix");
  }

  synth::CorpusOptions options() const {
    synth::CorpusOptions o;
    o.fs = fs;
    if (snr->count() > 0) o.snr_db = snr_db;
    o.baseline_amp_mv = baseline_mv;
    o.powerline_amp_mv = powerline_mv;
    o.sustained_s = sustained_s;
    o.id_prefix = prefix;
    return o;
  }
};

std::vector<synth::SynthResult> make_corpus(const CorpusFlags& f) {
  const synth::ClassMix mix = parse_mix(f.mix);
  synth::class_counts(f.n, mix);
  return synth::synth_corpus(f.n, mix, f.seed, f.options());
}

void write_corpus(const fs::path& dir, const std::vector<synth::SynthResult>& corpus) {
  make_dirs(dir / "truth");
  for (const auto& r : corpus) {
    text::write_file_atomic(dir / (r.record.id() + ".csv"), ingest::write_csv_record(r.record));
    text::write_file_atomic(dir / "truth" / (r.record.id() + ".csv"), synth::write_truth_csv(r));
  }
  text::write_file_atomic(dir / "manifest.csv", synth::write_manifest(corpus));
}

std::vector<classify::ModelKind> parse_models(const std::string& list) {
  std::vector<classify::ModelKind> kinds;
  for (std::string_view part : text::split(list, ',')) kinds.push_back(classify::parse_model_kind(text::trim(part)));
  if (kinds.empty()) throw Error(ErrorCode::InvalidConfig, "--models is empty");
  return kinds;
}

std::string segments_csv(const std::vector<std::pair<std::string, std::vector<features::Segment>>>& all) {
  std::string out = "record_id,start_s,end_s,label\n";
  for (const auto& [id, segs] : all) {
    for (const auto& s : segs) {
      out += id + ',' + text::format_double(s.start_s) + ',' + text::format_double(s.end_s) + ',' +
             std::string(to_string(s.label)) + '\n';
    }
  }
  return out;
}

class Cli {
public:
  Cli(std::ostream& out, std::ostream& err) : out_(out), err_(err) { build(); }

  int run(std::vector<std::string> args) {
    std::reverse(args.begin(), args.end());
    try {
      app_.parse(args);
    } catch (const CLI::CallForHelp& e) {
      return app_.exit(e, out_, err_);
    } catch (const CLI::CallForAllHelp& e) {
      return app_.exit(e, out_, err_);
    } catch (const CLI::ParseError& e) {
      err_ << "ERROR " << code_name(ErrorCode::Usage) << ": " << e.what() << "\n";
      return 1;
    }
    try {
      for (const auto& [sub, handler] : handlers_) {
        if (sub->parsed()) {
          handler();
          return 0;
        }
      }
      out_ << app_.help();
      return 0;
    } catch (const Error& e) {
      err_ << "ERROR " << code_name(e.code()) << ": " << e.what() << "\n";
      return is_io_error(e.code()) ? 2 : 1;
    } catch (const fs::filesystem_error& e) {
      err_ << "ERROR " << code_name(ErrorCode::Io) << ": " << e.what() << "\n";
      return 2;
    }
  }

private:
  void build() {
    app_.name("vtd");
    app_.description("Ventricular tachycardia detection from single-lead ECG records.");
    app_.require_subcommand(0, 1);
    build_synth();
    build_ingest();
    build_filter();
    build_detect();
    build_label();
    build_train();
    build_eval();
    build_compare();
    build_plot();
    build_noise_check();
    build_run_all();
  }

  void on(CLI::App* sub, std::function<void()> handler) { handlers_.emplace_back(sub, std::move(handler)); }

  void build_synth() {
    auto* sub = app_.add_subcommand("synth", "generate a labelled synthetic corpus");
    synth_flags_.add_to(sub);
    sub->add_option("--out", out_dir_, "output directory")->required();
    on(sub, [this] {
      const auto corpus = make_corpus(synth_flags_);
      write_corpus(out_dir_, corpus);
      out_ << "wrote " << corpus.size() << " records and manifest.csv to " << out_dir_ << "\n";
    });
  }

  void build_ingest() {
    auto* sub = app_.add_subcommand("ingest", "convert a WFDB record (.hea) or CSV record to the CSV record format");
    sub->add_option("--in", in_, "WFDB header or CSV record")->required();
    sub->add_option("--out", out_file_, "output CSV record")->required();
    sub->add_option("--id", id_, "record id to store (default: the record's own)");
    on(sub, [this] {
      EcgRecord rec = load_record(in_);
      if (!id_.empty()) rec = EcgRecord(rec.samples(), rec.fs(), id_);
      write_out(out_file_, ingest::write_csv_record(rec));
      out_ << rec.id() << ": " << rec.n_samples() << " samples at " << text::format_double(rec.fs()) << " Hz\n";
    });
  }

  void build_filter() {
    auto* sub = app_.add_subcommand("filter", "detrend and zero-phase bandpass a record");
    sub->add_option("--in", in_, "input record (CSV or .hea)")->required();
    sub->add_option("--out", out_file_, "filtered CSV record")->required();
    filter_flags_.add_to(sub, true, false, false);
    on(sub, [this] {
      const auto cfg = filter_flags_.resolve();
      const EcgRecord raw = load_record(in_);
      write_out(out_file_, ingest::write_csv_record(pipeline::preprocess(raw, cfg)));
    });
  }

  void build_detect() {
    auto* sub = app_.add_subcommand("detect", "R-peak detection and QRS delineation on a filtered record");
    sub->add_option("--in", in_, "filtered CSV record")->required();
    sub->add_option("--out", out_file_, "beat table CSV")->required();
    detect_flags_.add_to(sub, false, true, false);
    on(sub, [this] {
      const auto cfg = detect_flags_.resolve();
      const EcgRecord rec = load_record(in_);
      const auto beats = detect::build_beat_table(rec.samples(), rec.fs(), cfg.detector);
      write_out(out_file_, detect::write_beat_csv(beats, rec.id()));
      const auto fv = features::record_features(beats);
      out_ << rec.id() << ": " << beats.size() << " beats, HBR " << text::format_fixed(fv.hbr_bpm, 1) << " bpm\n";
    });
  }

  void build_label() {
    auto* sub = app_.add_subcommand("label", "record features and rule-based labels from beat tables");
    sub->add_option("--beats", beat_files_, "beat table CSVs")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_file_, "feature CSV")->required();
    sub->add_option("--segments", segments_file_, "also write the episode segmentation CSV");
    sub->add_option("--manifest", manifest_, "take labels from a synth manifest instead of the rule");
    label_flags_.add_to(sub, false, false, false);
    on(sub, [this] {
      const auto cfg = label_flags_.resolve();
      std::map<std::string, ClassLabel> truth;
      if (!manifest_.empty()) {
        for (const auto& e : synth::read_manifest(text::read_file(manifest_))) truth[e.record_id] = e.label;
      }
      std::vector<features::FeatureRow> rows;
      std::vector<std::pair<std::string, std::vector<features::Segment>>> segs;
      for (const auto& path : beat_files_) {
        const auto table = detect::read_beat_csv(text::read_file(path));
        features::FeatureRow row;
        row.record_id = table.record_id;
        row.fv = features::record_features(table.beats);
        auto s = features::episode_segmentation(table.beats, cfg.rule);
        row.label = features::record_label(s);
        if (!manifest_.empty()) {
          const auto it = truth.find(table.record_id);
          if (it == truth.end()) throw Error(ErrorCode::MalformedTable, "record '" + table.record_id + "' is not in the manifest");
          row.label = it->second;
        }
        segs.emplace_back(table.record_id, std::move(s));
        rows.push_back(row);
      }
      write_out(out_file_, features::write_feature_csv(rows));
      if (!segments_file_.empty()) write_out(segments_file_, segments_csv(segs));
      for (const auto& r : rows) out_ << r.record_id << " " << to_string(r.label) << "\n";
    });
  }

  void build_train() {
    auto* sub = app_.add_subcommand("train", "train one classifier on a feature CSV");
    sub->add_option("--features", features_file_, "feature CSV")->required();
    sub->add_option("--model", model_kind_, "knn, svm, logreg, tree or mlp")->required();
    sub->add_option("--out", out_file_, "model JSON")->required();
    train_flags_.add_to(sub, false, false, true);
    on(sub, [this] {
      const auto cfg = train_flags_.resolve();
      const auto kind = classify::parse_model_kind(model_kind_);
      const auto ds = classify::make_dataset(features::read_feature_csv(text::read_file(features_file_)));
      const auto model = classify::train(kind, ds, cfg.learners);
      write_out(out_file_, classify::save_model(model));
      std::size_t correct = 0;
      for (std::size_t i = 0; i < ds.size(); ++i) correct += classify::predict(model, ds.x.row(i)) == ds.y[i];
      out_ << classify::display_name(kind) << ": training accuracy "
           << text::format_fixed(static_cast<double>(correct) / static_cast<double>(ds.size()), 4) << " on "
           << ds.size() << " rows\n";
    });
  }

  void build_eval() {
    auto* sub = app_.add_subcommand("eval", "evaluate a saved model on a feature CSV");
    sub->add_option("--model", model_file_, "model JSON")->required();
    sub->add_option("--features", features_file_, "feature CSV")->required();
    sub->add_option("--csv", csv_file_, "also write the report as CSV");
    on(sub, [this] {
      const auto model = classify::load_model(text::read_file(model_file_));
      const auto rows = features::read_feature_csv(text::read_file(features_file_));
      if (rows.empty()) throw Error(ErrorCode::EmptyInput, "feature table has no rows");
      std::vector<std::string> truth, pred;
      for (const auto& r : rows) {
        truth.emplace_back(to_string(r.label));
        pred.push_back(classify::predict_label(model, classify::feature_array(r.fv)));
      }
      const auto report = eval::metrics(eval::confusion(truth, pred));
      const std::string name(classify::display_name(model.kind));
      if (!csv_file_.empty()) write_out(csv_file_, eval::format_report_csv(name, report));
      out_ << eval::format_report_text(report, name);
    });
  }

  void build_compare() {
    auto* sub = app_.add_subcommand("compare", "train and score all classifiers on one stratified split");
    sub->add_option("--features", features_file_, "feature CSV")->required();
    sub->add_option("--models", models_, "comma-separated subset of knn,svm,logreg,tree,mlp");
    test_frac_opt_ = sub->add_option("--test-frac", test_frac_, "held-out fraction per class");
    sub->add_option("--csv", csv_file_, "also write the table as CSV");
    sub->add_option("--out", out_file_, "also write the text table to a file");
    compare_flags_.add_to(sub, false, false, true);
    on(sub, [this] {
      auto cfg = compare_flags_.resolve();
      if (test_frac_opt_->count() > 0) cfg.test_frac = test_frac_;
      cfg.validate();
      const auto kinds = parse_models(models_);
      const auto ds = classify::make_dataset(features::read_feature_csv(text::read_file(features_file_)));
      const auto cmp = eval::compare_models(ds, kinds, cfg.learners, cfg.seed, cfg.test_frac);
      const std::string table = eval::format_comparison_text(cmp);
      if (!csv_file_.empty()) write_out(csv_file_, eval::format_comparison_csv(cmp));
      if (!out_file_.empty()) write_out(out_file_, table);
      out_ << table;
    });
  }

  void build_plot() {
    auto* sub = app_.add_subcommand("plot", "render a record and its R peaks as SVG");
    sub->add_option("--in", in_, "CSV record or .hea")->required();
    sub->add_option("--beats", beats_file_, "beat table CSV for the R-peak markers");
    sub->add_option("--out", out_file_, "SVG file")->required();
    sub->add_option("--start", plot_.start_s, "window start (s)");
    duration_opt_ = sub->add_option("--duration", duration_, "window length (s)");
    sub->add_option("--title", plot_.title, "plot title");
    sub->add_option("--width", plot_.width_px, "width (px)");
    sub->add_option("--height", plot_.height_px, "height (px)");
    on(sub, [this] {
      const EcgRecord rec = load_record(in_);
      std::vector<double> r_times;
      if (!beats_file_.empty()) r_times = detect::read_beat_csv(text::read_file(beats_file_)).beats.r_times_s;
      plot::PlotOptions opts = plot_;
      if (duration_opt_->count() > 0) opts.duration_s = duration_;
      write_out(out_file_, plot::render_svg(rec, r_times, opts));
    });
  }

  void build_noise_check() {
    auto* sub = app_.add_subcommand("noise-check", "compare HBR and rule label before and after filtering");
    sub->add_option("--in", in_, "raw record")->required();
    sub->add_option("--filtered", filtered_, "filtered record (default: filter --in with the pipeline settings)");
    noise_flags_.add_to(sub, true, true, false);
    on(sub, [this] {
      const auto cfg = noise_flags_.resolve();
      const EcgRecord raw = load_record(in_);
      const EcgRecord filtered = filtered_.empty() ? pipeline::preprocess(raw, cfg) : load_record(filtered_);
      const auto r = features::noise_effect_check(raw, filtered, cfg.detector, cfg.rule);
      out_ << "record " << raw.id() << "\n"
           << "HBR_i " << text::format_fixed(r.hbr_before_bpm, 1) << " bpm, label " << to_string(r.label_before) << "\n"
           << "HBR_f " << text::format_fixed(r.hbr_after_bpm, 1) << " bpm, label " << to_string(r.label_after) << "\n"
           << "criticality changed: " << (r.criticality_changed ? "yes" : "no") << "\n";
    });
  }

  void build_run_all() {
    auto* sub = app_.add_subcommand("run-all", "synth, filter, detect, label, train and compare in one go");
    run_flags_.add_to(sub);
    sub->add_option("--out", out_dir_, "output directory")->required();
    run_pipe_flags_.add_to(sub, true, true, false);
    on(sub, [this] {
      auto cfg = run_pipe_flags_.resolve();
      pipeline::set_seed(cfg, run_flags_.seed);
      const fs::path root = out_dir_;
      const auto corpus = make_corpus(run_flags_);
      write_corpus(root / "corpus", corpus);

      std::vector<EcgRecord> raw;
      for (const auto& r : corpus) raw.push_back(r.record);
      make_dirs(root / "filtered");
      make_dirs(root / "beats");
      std::vector<features::FeatureRow> rows;
      std::vector<std::pair<std::string, std::vector<features::Segment>>> segs;
      const auto analyses = pipeline::analyze_records(raw, cfg);
      for (std::size_t i = 0; i < raw.size(); ++i) {
        const EcgRecord filtered = pipeline::preprocess(raw[i], cfg);
        text::write_file_atomic(root / "filtered" / (raw[i].id() + ".csv"), ingest::write_csv_record(filtered));
        const auto& a = analyses[i];
        text::write_file_atomic(root / "beats" / (a.record_id + ".csv"), detect::write_beat_csv(a.beats, a.record_id));
        rows.push_back({a.record_id, a.fv, a.label});
        segs.emplace_back(a.record_id, a.segments);
      }
      text::write_file_atomic(root / "features.csv", features::write_feature_csv(rows));
      text::write_file_atomic(root / "segments.csv", segments_csv(segs));

      const auto ds = classify::make_dataset(rows);
      make_dirs(root / "models");
      for (classify::ModelKind k : classify::kAllModelKinds) {
        const auto model = classify::train(k, ds, cfg.learners);
        text::write_file_atomic(root / "models" / (std::string(classify::to_string(k)) + ".json"),
                                classify::save_model(model));
      }
      const auto cmp = eval::compare_models(ds, classify::kAllModelKinds, cfg.learners, cfg.seed, cfg.test_frac);
      const std::string table = eval::format_comparison_text(cmp);
      text::write_file_atomic(root / "compare.txt", table);
      text::write_file_atomic(root / "compare.csv", eval::format_comparison_csv(cmp));

      make_dirs(root / "plots");
      plot::PlotOptions opts;
      opts.duration_s = 10.0;
      const EcgRecord first = pipeline::preprocess(raw.front(), cfg);
      opts.title = first.id() + " (filtered)";
      text::write_file_atomic(root / "plots" / (first.id() + ".svg"),
                              plot::render_svg(first, analyses.front().beats.r_times_s, opts));
      out_ << table;
    });
  }

  std::ostream& out_;
  std::ostream& err_;
  CLI::App app_;
  std::vector<std::pair<CLI::App*, std::function<void()>>> handlers_;

  CorpusFlags synth_flags_, run_flags_;
  PipelineFlags filter_flags_, detect_flags_, label_flags_, train_flags_, compare_flags_, noise_flags_, run_pipe_flags_;
  std::string out_dir_, in_, out_file_, id_, segments_file_, manifest_, features_file_, model_kind_, model_file_,
      csv_file_, models_ = "knn,svm,logreg,tree,mlp", beats_file_, filtered_;
  std::vector<std::string> beat_files_;
  double test_frac_ = 0.2;
  CLI::Option* test_frac_opt_ = nullptr;
  plot::PlotOptions plot_;
  double duration_ = 0.0;
  CLI::Option* duration_opt_ = nullptr;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Cli cli(out, err);
  return cli.run(args);
}

}  // namespace vtd::cli
