#include "rca/error.hpp"
#include "rca/text.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

namespace rca::text {
namespace {

TEST(Text, SplitLinesKeepsTerminators) {
    const auto lines = split_lines_keep("a\nb\n\nc");
    ASSERT_EQ(lines.size(), 4u);
    EXPECT_EQ(lines[0], "a\n");
    EXPECT_EQ(lines[2], "\n");
    EXPECT_EQ(lines[3], "c");
    EXPECT_TRUE(split_lines_keep("").empty());
}

TEST(Text, SplitLinesDropsTrailingEmpty) {
    EXPECT_EQ(split_lines("a\nb\n"), (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(split_lines("a\n\n"), (std::vector<std::string>{"a", ""}));
}

TEST(Text, NormalizeWhitespace) {
    EXPECT_EQ(normalize_whitespace("  a \t b\n\nc  "), "a b c");
    EXPECT_EQ(normalize_whitespace(" \n "), "");
}

TEST(Text, TruncateNeverExceedsLimit) {
    test::Gen gen(3);
    for (int i = 0; i < 500; ++i) {
        std::string s(static_cast<std::size_t>(gen.uniform(0, 9000)), 'x');
        const auto limit = static_cast<std::size_t>(gen.uniform(1, 5000));
        const auto out = truncate_to(s, limit);
        EXPECT_LE(out.size(), limit);
        if (s.size() <= limit) EXPECT_EQ(out, s);
    }
}

TEST(Text, ElideMiddleKeepsHeadAndTail) {
    std::string s = std::string(10, 'h') + std::string(50, 'm') + std::string(5, 't');
    const auto out = elide_middle(s, 10, 5);
    EXPECT_TRUE(starts_with(out, std::string(10, 'h')));
    EXPECT_EQ(out.substr(out.size() - 5), "ttttt");
    EXPECT_NE(out.find("50 characters omitted"), std::string::npos);
    EXPECT_EQ(elide_middle("short", 10, 5), "short");
}

TEST(Text, SplitArgumentsHonoursQuotes) {
    EXPECT_EQ(split_arguments(R"(--lr 0.1 "a b" 'c d')"), (std::vector<std::string>{"--lr", "0.1", "a b", "c d"}));
    EXPECT_TRUE(split_arguments("   ").empty());
    EXPECT_EQ(split_arguments(R"("")"), (std::vector<std::string>{""}));
    EXPECT_THROW(split_arguments("\"open"), Error);
}

TEST(Text, Sha256KnownVectors) {
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Text, Levenshtein) {
    EXPECT_EQ(levenshtein("kitten", "sitting"), 3u);
    EXPECT_EQ(levenshtein("", "abc"), 3u);
    EXPECT_EQ(levenshtein("same", "same"), 0u);
}

TEST(Text, AtomicWriteRoundTrip) {
    test::TempDir dir;
    write_file_atomic(dir / "f.txt", "payload\n");
    EXPECT_EQ(read_file(dir / "f.txt"), "payload\n");
    write_file_atomic(dir / "f.txt", "second");
    EXPECT_EQ(read_file(dir / "f.txt"), "second");
    EXPECT_FALSE(std::filesystem::exists(dir / "f.txt.tmp"));
    EXPECT_THROW(read_file(dir / "missing"), Error);
}

}  // namespace
}  // namespace rca::text
