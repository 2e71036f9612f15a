#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "mcagg/io.hpp"

using namespace mcagg;

TEST_CASE("fnv1a64") {
  CHECK(fnv1a64_hex("") == "cbf29ce484222325");
  CHECK(fnv1a64_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a64_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("csv matrices, with and without labels") {
  auto a = parse_matrix_text("0.5,0.5\n0.25,0.75\n", Format::Csv);
  CHECK(a.size() == 2);
  CHECK(a.labels().empty());
  CHECK(a(1, 1) == 0.75);
  auto b = parse_matrix_text("x,y\n0.5,0.5\n0.25,0.75\n", Format::Csv);
  CHECK(b.labels() == std::vector<std::string>{"x", "y"});
  CHECK(b.rows() == a.rows());
  auto c = parse_matrix_text("0.5, 0.5\r\n\r\n0.25 ,0.75", Format::Csv);
  CHECK(c.rows() == a.rows());
}

TEST_CASE("csv errors") {
  try {
    parse_matrix_text("0.5,0.5\n0.25,abc\n", Format::Csv);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 6);
  }
  CHECK_THROWS_AS(parse_matrix_text("0.5,0.5\n1.0\n", Format::Csv), RaggedRows);
  CHECK_THROWS_AS(parse_matrix_text("0.5,0.5\n", Format::Csv), NonSquare);
  CHECK_THROWS_AS(parse_matrix_text("0.5,0.6\n0.5,0.5\n", Format::Csv), RowSumViolation);
  CHECK_THROWS_AS(parse_matrix_text("1.5,-0.5\n0.5,0.5\n", Format::Csv), NegativeEntry);
}

TEST_CASE("json matrices") {
  auto m = parse_matrix_text(R"({"labels": ["p", "q"], "matrix": [[1, 0], [0.5, 0.5]]})", Format::Json);
  CHECK(m.labels() == std::vector<std::string>{"p", "q"});
  CHECK(m(0, 0) == 1.0);
  CHECK_THROWS_AS(parse_matrix_text(R"({"matrix": [[1, 0], [0.5]]})", Format::Json), ValidationError);
  CHECK_THROWS_AS(parse_matrix_text("{not json", Format::Json), ParseError);
}

TEST_CASE("matrix round trip is exact") {
  Matrix r(3, 3);
  r << 1.0 / 3, 1.0 / 3, 1.0 / 3, 0.1, 0.2, 0.7, std::nextafter(0.5, 1.0), 0.0, 0.0;
  r(2, 2) = 1.0 - r(2, 0);
  auto pi = validate_stochastic(r, 1e-12, {"a", "b", "c"});
  for (auto f : {Format::Csv, Format::Json}) {
    auto back = parse_matrix_text(format_matrix(pi, f), f);
    CHECK(back.rows() == pi.rows());
    CHECK(back.labels() == pi.labels());
    CHECK(format_matrix(back, f) == format_matrix(pi, f));
  }
}

TEST_CASE("bigram ingestion") {
  auto pi = ingest_bigrams_text("TH 3\nta 1\n\nzz 2\n", 1e-9);
  CHECK(pi.size() == 26);
  CHECK(pi.labels().front() == "a");
  const auto t = static_cast<std::size_t>('t' - 'a');
  CHECK(pi(t, 'h' - 'a') == doctest::Approx(0.75));
  CHECK(pi(t, 0) == doctest::Approx(0.25));
  CHECK(pi(1, 1) == doctest::Approx(1.0 / 26.0));
  // without smoothing a letter with no outgoing counts has no transition row
  CHECK_THROWS_AS(ingest_bigrams_text("th 3\n", 0.0), RowSumViolation);
  auto smooth = ingest_bigrams_text("ab 24\n", 1.0);
  CHECK(smooth(0, 1) == doctest::Approx(25.0 / 50.0));
  CHECK(smooth(2, 5) == doctest::Approx(1.0 / 26.0));

  CHECK_THROWS_AS(ingest_bigrams_text("abc 1\n", 1.0), BadBigram);
  CHECK_THROWS_AS(ingest_bigrams_text("a1 1\n", 1.0), NonLetter);
  CHECK_THROWS_AS(ingest_bigrams_text("ab -1\n", 1.0), NegativeCount);
  CHECK_THROWS_AS(ingest_bigrams_text("ab\n", 1.0), BadBigram);
}

TEST_CASE("partition files") {
  auto parts = parse_partitions_text(R"({"1": [0, 0, 0], "2": [0, 1, 1]})", 3);
  CHECK(parts.at(2) == Partition(2, {0, 1, 1}));
  std::vector<std::string> labels{"a", "b", "c"};
  auto named = parse_partitions_text(R"({"2": [["c", "b"], ["a"]]})", 3, labels);
  CHECK(named.at(2) == Partition(2, {1, 0, 0}));
  CHECK_THROWS_AS(parse_partitions_text(R"({"2": [["a", "b"], ["a", "c"]]})", 3, labels), DuplicateLabel);
  CHECK_THROWS_AS(parse_partitions_text(R"({"2": [["a"], ["d", "b", "c"]]})", 3, labels), LabelMismatch);
  CHECK_THROWS_AS(parse_partitions_text(R"({"2": [["a"], ["b"]]})", 3, labels), LabelMismatch);
  CHECK_THROWS_AS(parse_partitions_text(R"({"2": [0, 0, 0]})", 3), BadAssignment);
  CHECK_THROWS_AS(parse_partitions_text(R"({"2": [0, 1]})", 3), ValidationError);
  auto again = parse_partitions_text(format_partitions(parts), 3);
  CHECK(again == parts);
}

TEST_CASE("report formats") {
  SelectionReport r;
  r.k_values = {1, 2, 3};
  r.t_bar = {2.0, 0.5, 0.0};
  r.t_bar_per_superstate = {{2.0}, {0.5, 0.25}, {0.0, 0.0, 0.0}};
  r.nu = {std::numeric_limits<double>::quiet_NaN(), std::log(4.0), std::numeric_limits<double>::infinity()};
  r.k_t = 3;
  r.exact_fit = 3;
  ReportMeta meta{"0123456789abcdef", {{"alpha", "0.9"}}};
  const std::string csv = format_report(r, meta, Format::Csv);
  CHECK(csv.find("# input_fnv1a64=0123456789abcdef\n") != std::string::npos);
  CHECK(csv.find("# alpha=0.9\n") != std::string::npos);
  CHECK(csv.find("# k_t=3\n") != std::string::npos);
  CHECK(csv.find("k,t_bar,nu\n1,2.000000000000,\n2,0.500000000000,1.386294361120\n3,0.000000000000,inf\n") !=
        std::string::npos);

  ReportMeta back_meta;
  auto back = parse_report_json(format_report(r, meta, Format::Json), &back_meta);
  CHECK(back.k_values == r.k_values);
  CHECK(back.t_bar == r.t_bar);
  CHECK(std::isnan(back.nu[0]));
  CHECK(back.nu[1] == r.nu[1]);
  CHECK(std::isinf(back.nu[2]));
  CHECK(back.k_t == 3);
  CHECK(back.exact_fit == std::optional<std::size_t>(3));
  CHECK(back.t_bar_per_superstate == r.t_bar_per_superstate);
  CHECK(back_meta.input_hash == meta.input_hash);
}

TEST_CASE("file errors") {
  CHECK_THROWS_AS(read_file("/nonexistent/dir/m.csv"), IoError);
  CHECK_THROWS_AS(write_file("/nonexistent/dir/m.csv", "x"), IoError);
  CHECK(parse_format("csv") == Format::Csv);
  CHECK_THROWS_AS(parse_format("xml"), ValidationError);
}
