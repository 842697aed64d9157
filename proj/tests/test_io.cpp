#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "openmix/io.hpp"
#include "openmix/rng.hpp"

using namespace openmix;

TEST(Io, FormatRoundTripsExactly) {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-300.0, 300.0));
    EXPECT_EQ(*parse_double(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_EQ(format_double(-HUGE_VAL), "-inf");
  EXPECT_TRUE(std::isnan(*parse_double("nan")));
}

TEST(Io, ParseIsStrict) {
  EXPECT_FALSE(parse_double("1.5x"));
  EXPECT_FALSE(parse_double(""));
  EXPECT_FALSE(parse_double("abc"));
  EXPECT_EQ(*parse_double(" 2.5 "), 2.5);
  EXPECT_EQ(*parse_double("+3"), 3.0);
  EXPECT_EQ(*parse_double("-1e-3"), -1e-3);
}

TEST(Io, AtomicWriteReplacesContents) {
  const auto path = std::filesystem::temp_directory_path() / "openmix_tests" / "io" / "f.txt";
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  EXPECT_EQ(read_file(path), "second");
  EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  EXPECT_EQ(trim("  a b \n"), "a b");
  EXPECT_EQ(trim(" \t"), "");
}
