#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run star(const std::string& args) {
  const std::string cmd = std::string(STAR_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), p) != nullptr) r.out += buf.data();
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("star_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // A pole seen at 12 s and again at 300 s, and a forklift.
  void write_small_records(const std::string& extra_caption = "") {
    write(dir_ / "captions.jsonl",
          R"({"id": 1, "t_start": 12, "t_end": 15, "pose": [20,18,0,0], "text": "yellow police call pole with help sign", "primitive_ids": [1]})"
          "\n"
          R"({"id": 2, "t_start": 18, "t_end": 21, "pose": [50,8,0,0], "text": "yellow forklift parked", "primitive_ids": [2]})"
          "\n"
          R"({"id": 3, "t_start": 297, "t_end": 300, "pose": [20,18,0,0], "text": "police call pole again", "primitive_ids": [1]})"
          "\n" + extra_caption);
    write(dir_ / "primitives.jsonl",
          R"({"id": 1, "centroid": [20,20,1], "bbox": [[19.5,19.5,0],[20.5,20.5,2]], "caption": "yellow police call pole", "detections": [13, 300]})"
          "\n"
          R"({"id": 2, "centroid": [50,10,1], "bbox": [[49,9,0],[51,11,2]], "caption": "yellow forklift", "detections": [19]})"
          "\n");
    std::string kf;
    for (int t = 0; t <= 300; t += 1) {
      kf += R"({"timestamp": )" + std::to_string(t) + R"(, "image_ref": "kf/)" + std::to_string(t) +
            R"(.jpg", "visible_primitive_ids": [], "annotation": null})" + "\n";
    }
    write(dir_ / "keyframes.jsonl", kf);
  }

  std::string path(const char* name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenIsDeterministic) {
  ASSERT_EQ(star("gen -o " + path("a")).code, 0);
  ASSERT_EQ(star("gen -o " + path("b")).code, 0);
  for (const char* f : {"captions.jsonl", "primitives.jsonl", "keyframes.jsonl", "tasks.jsonl"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  const auto other = star("--seed 5 gen -o " + path("c"));
  ASSERT_EQ(other.code, 0);
  EXPECT_NE(slurp(dir_ / "a" / "captions.jsonl"), slurp(dir_ / "c" / "captions.jsonl"));
}

TEST_F(Cli, BuildReportsCounts) {
  ASSERT_EQ(star("gen -o " + path("raw")).code, 0);
  const auto r = star("build --from " + path("raw") + " -o " + path("snap"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("captions: 400"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("validation: ok"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "snap" / "manifest.json"));
}

TEST_F(Cli, DanglingReferenceNamesTheCaption) {
  write_small_records(
      R"({"id": 4, "t_start": 30, "t_end": 33, "pose": [0,0,0,0], "text": "ghost", "primitive_ids": [99]})"
      "\n");
  const auto r = star("build --from " + dir_.string() + " -o " + path("snap"));
  EXPECT_EQ(r.code, 1) << r.out;
  EXPECT_NE(r.out.find("caption 4"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("99"), std::string::npos) << r.out;
}

TEST_F(Cli, MixedVectorsRejected) {
  write_small_records(
      R"({"id": 4, "t_start": 30, "t_end": 33, "pose": [0,0,0,0], "text": "x", "primitive_ids": [1], "embedding": [1, 0]})"
      "\n");
  const auto r = star("build --from " + dir_.string() + " -o " + path("snap"));
  EXPECT_EQ(r.code, 1) << r.out;
}

TEST_F(Cli, QueryAnswersAndRendersTime) {
  write_small_records();
  ASSERT_EQ(star("build --from " + dir_.string() + " -o " + path("snap")).code, 0);
  const auto where = star("query -s " + path("snap") + " \"Where is the police call pole?\"");
  ASSERT_EQ(where.code, 0) << where.out;
  EXPECT_NE(where.out.find("position: 20.000 20.000 1.000"), std::string::npos) << where.out;

  const auto when =
      star("query -s " + path("snap") + " --now 780 \"When did you last see the police call pole?\"");
  ASSERT_EQ(when.code, 0) << when.out;
  EXPECT_NE(when.out.find("answer: 8 mins ago"), std::string::npos) << when.out;

  const auto json = star("query -s " + path("snap") + " --json \"Where is the forklift?\"");
  ASSERT_EQ(json.code, 0);
  EXPECT_EQ(json.out.front(), '{');
}

TEST_F(Cli, UsageErrorsExitTwo) {
  write_small_records();
  ASSERT_EQ(star("build --from " + dir_.string() + " -o " + path("snap")).code, 0);
  EXPECT_EQ(star("query -s " + path("snap") + " \"\"").code, 2);
  EXPECT_EQ(star("query -s " + path("missing") + " \"Where is it?\"").code, 2);
  EXPECT_EQ(star("eval -m bogus").code, 2);
  EXPECT_EQ(star("--set tau=7 eval").code, 2);
  EXPECT_EQ(star("frobnicate").code, 2);
}

TEST_F(Cli, EvalIsDeterministic) {
  ASSERT_EQ(star("gen -o " + path("raw")).code, 0);
  ASSERT_EQ(star("build --from " + path("raw") + " -o " + path("snap")).code, 0);
  const std::string args =
      "eval --snapshot " + path("snap") + " --tasks " + (dir_ / "raw" / "tasks.jsonl").string();
  const auto a = star(args + " -r " + path("a.jsonl"));
  const auto b = star(args + " -j 3 -r " + path("b.jsonl"));
  ASSERT_EQ(a.code, 0) << a.out;
  ASSERT_EQ(b.code, 0) << b.out;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(slurp(dir_ / "a.jsonl"), slurp(dir_ / "b.jsonl"));
}
