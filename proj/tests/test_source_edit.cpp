#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "simforge/equivalence.hpp"
#include "simforge/source_edit.hpp"
#include "support.hpp"

using namespace simforge;
using Sites = std::vector<std::size_t>;

TEST(SourceLines, SplitJoinRoundTrip) {
  for (const std::string text : {"", "a\n", "a\nb", "a\n\nb\n", "\n"}) EXPECT_EQ(SourceLines::split(text).join(), text);
  EXPECT_EQ(line_count("a\nb\n"), 2u);
  EXPECT_EQ(line_count("a\nb"), 2u);
}

TEST(InsertionSites, StraightLineBody) {
  const char* src =
      "int f(int x)\n"  // 1
      "{\n"             // 2
      "    int y = x;\n"  // 3
      "    y += 2;\n"   // 4
      "    return y;\n"  // 5
      "}\n";            // 6
  EXPECT_EQ(insertion_sites(src), (Sites{2, 3, 4, 5}));
}

TEST(InsertionSites, NothingOutsideFunctions) {
  const char* src =
      "struct P {\n"
      "    int a;\n"
      "    int b;\n"
      "};\n"
      "static int table[] = {\n"
      "    1,\n"
      "    2,\n"
      "};\n"
      "int g;\n";
  EXPECT_TRUE(insertion_sites(src).empty());
}

TEST(InsertionSites, EmptyBodies) {
  EXPECT_EQ(insertion_sites("void f(void)\n{\n}\n"), (Sites{2}));
  EXPECT_TRUE(insertion_sites("void g(void) {}\n").empty());
}

TEST(InsertionSites, ElseAndDoWhile) {
  const char* src =
      "int f(int x)\n"    // 1
      "{\n"               // 2
      "    if (x) {\n"    // 3
      "        x = 1;\n"  // 4
      "    }\n"           // 5
      "    else {\n"      // 6
      "        x = 2;\n"  // 7
      "    }\n"           // 8
      "    do {\n"        // 9
      "        x--;\n"    // 10
      "    }\n"           // 11
      "    while (x);\n"  // 12
      "    return x;\n"   // 13
      "}\n";
  const Sites s = insertion_sites(src);
  EXPECT_EQ(std::count(s.begin(), s.end(), 5u), 0);
  EXPECT_EQ(std::count(s.begin(), s.end(), 11u), 0);
  for (std::size_t want : {2u, 3u, 4u, 6u, 7u, 8u, 9u, 10u, 12u}) EXPECT_EQ(std::count(s.begin(), s.end(), want), 1) << want;
}

TEST(InsertionSites, MultiLineStatementsAndComments) {
  const char* src =
      "int f(int a,\n"     // 1
      "      int b)\n"     // 2
      "{\n"                // 3
      "    int c = a +\n"  // 4
      "        b;\n"       // 5
      "    /* note\n"      // 6
      "       more */\n"   // 7
      "    return c;\n"    // 8
      "}\n";
  const Sites s = insertion_sites(src);
  EXPECT_EQ(std::count(s.begin(), s.end(), 4u), 0);
  EXPECT_EQ(std::count(s.begin(), s.end(), 6u), 0);
  EXPECT_EQ(std::count(s.begin(), s.end(), 3u), 1);
  EXPECT_EQ(std::count(s.begin(), s.end(), 5u), 1);
}

TEST(InsertionSites, EveryFixtureSiteAcceptsADeclaration) {
  for (const std::string& name : testing_support::attack_fixtures()) {
    const std::string src = testing_support::fixture(name);
    const EquivalenceOracle eq({}, src);
    std::size_t accepted = 0;
    const Sites sites = insertion_sites(src);
    ASSERT_FALSE(sites.empty()) << name;
    for (std::size_t site : sites) {
      SourceLines lines = SourceLines::split(src);
      insert_line(lines, site, "int zz_fresh = 0;");
      const std::string text = lines.join();
      EXPECT_TRUE(compile({}, text).success) << name << " site " << site;
      accepted += eq.matches(text);
    }
    EXPECT_GT(accepted, sites.size() / 2) << name;
  }
}

TEST(Selectable, Filters) {
  EXPECT_TRUE(is_selectable("int i = 0;"));
  EXPECT_TRUE(is_selectable("x = y + 1;"));
  EXPECT_TRUE(is_selectable("{ int t = 0; }"));
  EXPECT_FALSE(is_selectable("printf(\"x\");"));
  EXPECT_FALSE(is_selectable("fprintf(stderr, \"%d\", x);"));
  EXPECT_FALSE(is_selectable("return 0;"));
  EXPECT_FALSE(is_selectable("x = 1; return x;"));
  EXPECT_FALSE(is_selectable("for (i = 0; i < n; i++) {"));
  EXPECT_FALSE(is_selectable("if (x)"));
  EXPECT_FALSE(is_selectable("}"));
  EXPECT_FALSE(is_selectable("#include <stdio.h>"));
  EXPECT_FALSE(is_selectable("int f(int x)"));
  EXPECT_FALSE(is_selectable("int a = (b;"));
  EXPECT_FALSE(is_selectable(""));
}

TEST(DeclaredNames, Declarators) {
  EXPECT_EQ(declared_names("int i = 0, j, *k;"), (std::vector<std::string>{"i", "j", "k"}));
  EXPECT_EQ(declared_names("unsigned long total = a + b;"), (std::vector<std::string>{"total"}));
  EXPECT_EQ(declared_names("double m[3][3];"), (std::vector<std::string>{"m"}));
  EXPECT_EQ(declared_names("struct node *head = NULL;"), (std::vector<std::string>{"head"}));
  EXPECT_EQ(declared_names("Matrix a, b;"), (std::vector<std::string>{"a", "b"}));
  EXPECT_TRUE(declared_names("x = 1;").empty());
  EXPECT_TRUE(declared_names("f(x);").empty());
}

TEST(FreshNamer, RenamesOnlyCollisions) {
  FreshNamer namer;
  const std::unordered_set<std::string> taken = {"i", "n", "i_1"};
  EXPECT_EQ(namer.prepare("int i = n;", taken), "int i_2 = n;");
  EXPECT_EQ(namer.prepare("int q = 0;", taken), "int q = 0;");
  EXPECT_EQ(namer.prepare("int i_7 = 0;", {"i_7"}), "int i_3 = 0;");
  EXPECT_EQ(namer.prepare("int i = s.i;", taken), "int i_4 = s.i;");
}

TEST(FreshNamer, RenamedLineStillDeclaresFreshNames) {
  FreshNamer namer;
  const std::string src = testing_support::fixture("sort.c");
  const std::unordered_set<std::string> taken = identifiers_in(src);
  for (const std::string& line : candidate_lines(src)) {
    const std::string out = namer.prepare(line, taken);
    for (const std::string& name : declared_names(out)) EXPECT_FALSE(taken.contains(name)) << out;
  }
}

TEST(InsertLine, IndentsLikeSurroundings) {
  SourceLines s = SourceLines::split("int f(void)\n{\n    int a = 1;\n    return a;\n}\n");
  EXPECT_EQ(insert_line(s, 2, "int b = 0;"), 3u);
  EXPECT_EQ(s.lines[2], "    int b = 0;");
  EXPECT_EQ(insert_line(s, 3, "  int c = 0;  "), 4u);
  EXPECT_EQ(s.lines[3], "    int c = 0;");
  EXPECT_EQ(s.size(), 7u);
}

TEST(CandidateLines, SkipsBlankAndCommentLines) {
  const std::string src = "/* header\n   block */\nint x;\n\n// note\n    x = 1;  \n";
  EXPECT_EQ(candidate_lines(src), (std::vector<std::string>{"int x;", "x = 1;"}));
}
