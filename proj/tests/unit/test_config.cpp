#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include <flexstate/config.hpp>
#include <flexstate/error.hpp>

using namespace flexstate;

namespace {

Errc parse_error(std::string_view text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::InvalidArgument;
}

}  // namespace

TEST(Config, ParsesExample) {
  auto c = parse_config("NF id: nf1;\nNF instance id: ins1;\ndriver: flatkvs;\nflush interval us: 1000;\n");
  EXPECT_EQ(c.nf_id, "nf1");
  EXPECT_EQ(c.instance_id, "ins1");
  EXPECT_EQ(c.driver_label, "flatkvs");
  EXPECT_EQ(c.endpoint, "local");
  EXPECT_EQ(c.flush_interval, std::chrono::microseconds(1000));
}

TEST(Config, SeveralPairsPerLineAndComments) {
  auto c = parse_config("# test\nNF id: a; NF instance id: b; driver: resp; endpoint: 127.0.0.1:6379;\n");
  EXPECT_EQ(c.driver_label, "resp");
  EXPECT_EQ(c.endpoint, "127.0.0.1:6379");
  EXPECT_EQ(c.flush_interval, std::chrono::microseconds(1000));
}

TEST(Config, Errors) {
  EXPECT_EQ(parse_error("NF id: a; NF instance id: b; driver: oracle;"), Errc::UnknownDriver);
  EXPECT_EQ(parse_error("NF id: a; driver: flatkvs;"), Errc::MissingField);
  EXPECT_EQ(parse_error("NF instance id: b; driver: flatkvs;"), Errc::MissingField);
  EXPECT_EQ(parse_error("NF id: a; NF instance id: b;"), Errc::MissingField);
  EXPECT_EQ(parse_error("NF id: a; NF instance id: b; driver: flatkvs; flush interval us: 0;"),
            Errc::BadDuration);
  EXPECT_EQ(parse_error("NF id: a; NF instance id: b; driver: flatkvs; flush interval us: fast;"),
            Errc::BadDuration);
  EXPECT_EQ(parse_error("NF id: a; NF instance id: b; driver: flatkvs; colour: red;"), Errc::SyntaxError);
  EXPECT_EQ(parse_error("NF id a;"), Errc::SyntaxError);
  EXPECT_EQ(parse_error("NF id: a@b; NF instance id: b; driver: flatkvs;"), Errc::InvalidToken);
}

TEST(Config, RenderRoundTrip) {
  FlexConfig c{"tablestore", "local", std::chrono::microseconds(500), "nfx", "i7"};
  EXPECT_EQ(parse_config(render_config(c)), c);
}

TEST(Config, LoadFromFile) {
  auto path = std::filesystem::temp_directory_path() / "flexstate_cfg_test.conf";
  std::ofstream(path) << "NF id: nf1;\nNF instance id: ins1;\ndriver: tablestore;\n";
  EXPECT_EQ(load_config(path).driver_label, "tablestore");
  std::filesystem::remove(path);
}
