#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "test_util.hpp"
#include "vtd/text.hpp"

namespace vtd::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result vtd(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto at = s.find(needle); at != std::string::npos; at = s.find(needle, at + 1)) ++n;
  return n;
}

std::size_t count_files(const fs::path& dir, const std::string& ext) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.is_regular_file() && e.path().extension() == ext;
  return n;
}

TEST(Cli, HelpExitsZero) {
  const Result r = vtd({"--help"});
  EXPECT_EQ(r.code, 0);
  for (const char* sub : {"synth", "ingest", "filter", "detect", "label", "train", "eval", "compare", "plot",
                          "noise-check", "run-all"}) {
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
  }
  EXPECT_EQ(vtd({"detect", "--help"}).code, 0);
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(vtd({"frobnicate"}).code, 1);
  const Result missing = vtd({"detect", "--in", "x.csv"});
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.err.find("ERROR"), std::string::npos);
}

TEST(Cli, MissingInputExitsTwo) {
  test::TempDir dir("cli_io");
  const Result r = vtd({"filter", "--in", (dir / "absent.csv").string(), "--out", (dir / "f.csv").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(fs::exists(dir / "f.csv"));
}

TEST(Cli, SynthFilterDetectPlot) {
  test::TempDir dir("cli_chain");
  const fs::path corpus = dir / "corpus";
  Result r = vtd({"synth", "--n", "60", "--mix", "0.4,0.3,0.3", "--seed", "3", "--out", corpus.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_files(corpus, ".csv"), 61u);  // 60 records and the manifest
  EXPECT_EQ(count_files(corpus / "truth", ".csv"), 60u);
  const std::string manifest = text::read_file(corpus / "manifest.csv");
  EXPECT_EQ(count(manifest, ",NonVT,"), 24u);
  EXPECT_EQ(count(manifest, ",SustainedVT,"), 18u);
  EXPECT_EQ(count(manifest, ",NonSustainedVT,"), 18u);

  const fs::path rec = corpus / "syn0001.csv";
  ASSERT_TRUE(fs::exists(rec));
  r = vtd({"filter", "--in", rec.string(), "--out", (dir / "f.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  r = vtd({"detect", "--in", (dir / "f.csv").string(), "--out", (dir / "beats.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string beats = text::read_file(dir / "beats.csv");
  std::size_t n_beats = 0;
  for (std::string_view line : text::split_lines(beats)) {
    if (!line.empty() && line[0] != '#' && line[0] >= '0' && line[0] <= '9') ++n_beats;
  }
  ASSERT_GT(n_beats, 10u);
  EXPECT_NE(r.out.find(std::to_string(n_beats) + " beats"), std::string::npos) << r.out;

  r = vtd({"plot", "--in", (dir / "f.csv").string(), "--beats", (dir / "beats.csv").string(), "--out",
           (dir / "p.svg").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count(text::read_file(dir / "p.svg"), "class=\"rpeak\""), n_beats);

  r = vtd({"label", "--beats", (dir / "beats.csv").string(), "--out", (dir / "features.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(text::read_file(dir / "features.csv").find("syn0001"), std::string::npos);

  r = vtd({"noise-check", "--in", rec.string()});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST(Cli, ValidationFailureWritesNothing) {
  test::TempDir dir("cli_partial");
  text::write_file_atomic(dir / "tiny.csv", "# fs=250 id=tiny\n0\n0.1\n0\n");
  Result r = vtd({"filter", "--in", (dir / "tiny.csv").string(), "--out", (dir / "f.csv").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("TooShort"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir / "f.csv"));

  r = vtd({"filter", "--in", (dir / "tiny.csv").string(), "--out", (dir / "g.csv").string(), "--order", "3"});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(fs::exists(dir / "g.csv"));

  text::write_file_atomic(dir / "bad.csv", "# fs=250 id=bad\n0\nabc\n");
  r = vtd({"filter", "--in", (dir / "bad.csv").string(), "--out", (dir / "h.csv").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir / "h.csv"));
}

TEST(Cli, ConfigFileAndSetOverrides) {
  test::TempDir dir("cli_config");
  text::write_file_atomic(dir / "bad.cfg", "order = 4\nnot_a_key = 1\n");
  vtd({"synth", "--n", "3", "--mix", "1,0,0", "--out", (dir / "c").string()});
  const std::string rec = (dir / "c" / "syn0001.csv").string();
  Result r = vtd({"filter", "--in", rec, "--out", (dir / "f.csv").string(), "--config", (dir / "bad.cfg").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("config line 2"), std::string::npos) << r.err;
  r = vtd({"filter", "--in", rec, "--out", (dir / "f.csv").string(), "--set", "order=5"});
  EXPECT_EQ(r.code, 1);
  r = vtd({"filter", "--in", rec, "--out", (dir / "f.csv").string(), "--set", "order=4"});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST(Cli, RunAllIsDeterministic) {
  test::TempDir dir("cli_runall");
  const std::vector<std::string> base{"run-all", "--n", "30", "--seed", "11"};
  auto args_a = base, args_b = base;
  args_a.insert(args_a.end(), {"--out", (dir / "a").string()});
  args_b.insert(args_b.end(), {"--out", (dir / "b").string()});
  const Result a = vtd(args_a);
  const Result b = vtd(args_b);
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(a.out, b.out);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), dir / "a");
    ASSERT_TRUE(fs::exists(dir / "b" / rel)) << rel;
    EXPECT_EQ(text::read_file(e.path()), text::read_file(dir / "b" / rel)) << rel;
    ++files;
  }
  EXPECT_GT(files, 90u);
  EXPECT_NE(a.out.find("Algorithm"), std::string::npos);
}

TEST(Cli, TrainEvalCompare) {
  test::TempDir dir("cli_models");
  ASSERT_EQ(vtd({"run-all", "--n", "30", "--out", (dir / "r").string()}).code, 0);
  const std::string features = (dir / "r" / "features.csv").string();
  Result r = vtd({"train", "--features", features, "--model", "tree", "--out", (dir / "tree.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  r = vtd({"eval", "--model", (dir / "tree.json").string(), "--features", features, "--csv",
           (dir / "eval.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("weighted avg"), std::string::npos);
  r = vtd({"compare", "--features", features, "--models", "logreg"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("Logistic Regression"), std::string::npos);
  EXPECT_EQ(r.out.find("Decision Tree"), std::string::npos);
  r = vtd({"train", "--features", features, "--model", "forest", "--out", (dir / "x.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(fs::exists(dir / "x.json"));
}

}  // namespace
}  // namespace vtd::cli
