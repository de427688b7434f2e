#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "star/config.hpp"
#include "star/error.hpp"

using namespace star;
namespace fs = std::filesystem;

TEST(Config, DefaultsAreValid) {
  RetrievalConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.K, 6u);
  EXPECT_EQ(c.tau, 0.55);
}

TEST(Config, SetParsesValues) {
  RetrievalConfig c;
  c.set("tau", " 0.4 ");
  c.set("K", "3");
  c.set("cooccurrence_edges", "false");
  c.set("external_generator_url", "http://localhost:9/x");
  EXPECT_EQ(c.tau, 0.4);
  EXPECT_EQ(c.K, 3u);
  EXPECT_FALSE(c.cooccurrence_edges);
  EXPECT_EQ(c.external_generator_url, "http://localhost:9/x");
  c.set("external_generator_url", "");
  EXPECT_FALSE(c.external_generator_url.has_value());
}

TEST(Config, RejectsBadInput) {
  RetrievalConfig c;
  for (auto [k, v] : std::vector<std::pair<const char*, const char*>>{
           {"tau", "high"}, {"K", "-1"}, {"unknown", "1"}, {"cooccurrence_edges", "maybe"}}) {
    try {
      c.set(k, v);
      ADD_FAILURE() << k;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidConfig) << k;
    }
  }
}

TEST(Config, ValidateRanges) {
  auto invalid = [](auto mutate) {
    RetrievalConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), Error);
  };
  invalid([](RetrievalConfig& c) { c.tau = 1.5; });
  invalid([](RetrievalConfig& c) { c.alpha = 0.0; });
  invalid([](RetrievalConfig& c) { c.alpha = 1.0; });
  invalid([](RetrievalConfig& c) { c.K = 0; });
  invalid([](RetrievalConfig& c) { c.gamma_topk = 0; });
  invalid([](RetrievalConfig& c) { c.r_adj = 0.0; });
  invalid([](RetrievalConfig& c) { c.max_rounds = 4; });
  invalid([](RetrievalConfig& c) { c.delta_bar = -0.1; });
}

TEST(Config, FileAndEntriesRoundTrip) {
  const fs::path p = fs::temp_directory_path() / "star_config_test.conf";
  {
    std::ofstream out(p);
    out << "# tuned\ndelta_bar = 0.1\nK=4\n";
  }
  RetrievalConfig c;
  c.merge_file(p);
  EXPECT_EQ(c.delta_bar, 0.1);
  EXPECT_EQ(c.K, 4u);

  RetrievalConfig d;
  for (const auto& [k, v] : c.entries()) d.set(k, v);
  EXPECT_EQ(d.entries(), c.entries());
  fs::remove(p);
  EXPECT_THROW(c.merge_file(p), Error);
}
