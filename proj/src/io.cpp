#include "mcagg/io.hpp"

#include <json.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace mcagg {

using nlohmann::json;

namespace {

constexpr double kParseTol = 1e-6;

struct Line {
  std::size_t number;
  std::string_view text;
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t start = 0;
  std::size_t number = 1;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view l = text.substr(start, end - start);
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    lines.push_back({number++, l});
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

struct Field {
  std::size_t column;  // 1-based character column
  std::string_view text;
};

std::vector<Field> split_fields(std::string_view line) {
  std::vector<Field> out;
  std::size_t start = 0;
  while (true) {
    std::size_t end = line.find(',', start);
    if (end == std::string_view::npos) end = line.size();
    out.push_back({start + 1, trim(line.substr(start, end - start))});
    if (end == line.size()) break;
    start = end + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string fmt(const char* spec, double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

json number_or_string(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double from_json_number(const json& v) {
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw ValidationError("report: unexpected string value '" + s + "'");
  }
  return v.get<double>();
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // nlohmann reports a byte offset; convert to line / column
    std::size_t line = 1, col = 1;
    for (std::size_t b = 0; b + 1 < e.byte && b < text.size(); ++b) {
      if (text[b] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(line, col, "malformed json");
  }
}

std::string_view mode_name(CovarianceMode m) { return m == CovarianceMode::Plain ? "plain" : "whiten"; }
std::string_view membership_name(Membership m) { return m == Membership::Normalized ? "normalized" : "raw"; }

}  // namespace

Format parse_format(std::string_view name) {
  if (name == "csv") return Format::Csv;
  if (name == "json") return Format::Json;
  throw ValidationError("unknown format '" + std::string(name) + "' (expected csv or json)");
}

std::string_view to_string(Format f) { return f == Format::Csv ? "csv" : "json"; }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("cannot write " + path.string());
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

StochasticMatrix parse_matrix_text(std::string_view text, Format format) {
  if (format == Format::Json) {
    const json doc = parse_json(text);
    if (!doc.is_object() || !doc.contains("matrix") || !doc["matrix"].is_array()) {
      throw ParseError(1, 1, "expected an object with a \"matrix\" array");
    }
    const auto& rows = doc["matrix"];
    const std::size_t n = rows.size();
    Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      if (!rows[i].is_array()) throw ParseError(1, 1, "matrix row " + std::to_string(i) + " is not an array");
      if (rows[i].size() != n) throw RaggedRows(i + 1, n, rows[i].size());
      for (std::size_t c = 0; c < n; ++c) {
        if (!rows[i][c].is_number()) throw ParseError(1, 1, "matrix entry (" + std::to_string(i) + ", " +
                                                                std::to_string(c) + ") is not a number");
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c].get<double>();
      }
    }
    std::vector<std::string> labels;
    if (doc.contains("labels")) {
      if (!doc["labels"].is_array()) throw ParseError(1, 1, "\"labels\" must be an array of strings");
      for (const auto& l : doc["labels"]) {
        if (!l.is_string()) throw ParseError(1, 1, "\"labels\" must be an array of strings");
        labels.push_back(l.get<std::string>());
      }
    }
    return validate_stochastic(std::move(m), kParseTol, std::move(labels));
  }

  std::vector<Line> lines;
  for (const Line& l : split_lines(text)) {
    if (!trim(l.text).empty()) lines.push_back(l);
  }
  std::vector<std::string> labels;
  std::size_t first = 0;
  if (!lines.empty()) {
    const auto fields = split_fields(lines[0].text);
    bool numeric = true;
    double tmp = 0.0;
    for (const auto& f : fields) numeric = numeric && parse_double(f.text, tmp);
    if (!numeric) {
      for (const auto& f : fields) labels.emplace_back(f.text);
      first = 1;
    }
  }
  const std::size_t n = lines.size() - first;
  if (n == 0) throw ParseError(1, 1, "no matrix rows");
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::size_t width = 0;
  for (std::size_t r = 0; r < n; ++r) {
    const Line& line = lines[first + r];
    const auto fields = split_fields(line.text);
    if (r == 0) width = fields.size();
    if (fields.size() != width) throw RaggedRows(line.number, width, fields.size());
    if (fields.size() != n) throw NonSquare(n, fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double v = 0.0;
      if (!parse_double(fields[c].text, v)) {
        throw ParseError(line.number, fields[c].column, "not a number: '" + std::string(fields[c].text) + "'");
      }
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return validate_stochastic(std::move(m), kParseTol, std::move(labels));
}

StochasticMatrix parse_matrix(const std::filesystem::path& path, Format format) {
  return parse_matrix_text(read_file(path), format);
}

std::string format_matrix(const StochasticMatrix& pi, Format format) {
  const std::size_t n = pi.size();
  if (format == Format::Json) {
    json doc = json::object();
    if (!pi.labels().empty()) doc["labels"] = pi.labels();
    json rows = json::array();
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = pi.row(i);
      rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    doc["matrix"] = std::move(rows);
    return doc.dump(1) + "\n";
  }
  std::string out;
  if (!pi.labels().empty()) {
    for (std::size_t c = 0; c < n; ++c) out += (c ? "," : "") + pi.labels()[c];
    out += "\n";
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < n; ++c) {
      if (c) out += ",";
      out += fmt("%.17g", pi(i, c));
    }
    out += "\n";
  }
  return out;
}

void write_matrix(const StochasticMatrix& pi, const std::filesystem::path& path, Format format) {
  write_file(path, format_matrix(pi, format));
}

StochasticMatrix ingest_bigrams_text(std::string_view text, double eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ValidationError("smoothing must be a finite non-negative number");
  Matrix counts = Matrix::Constant(26, 26, eta);
  for (const Line& line : split_lines(text)) {
    const std::string_view s = trim(line.text);
    if (s.empty()) continue;
    std::size_t split = 0;
    while (split < s.size() && !std::isspace(static_cast<unsigned char>(s[split]))) ++split;
    const std::string_view pair = s.substr(0, split);
    const std::string_view count = trim(s.substr(split));
    if (pair.size() != 2 || count.empty()) throw BadBigram(line.number);
    int idx[2];
    for (int t = 0; t < 2; ++t) {
      const auto ch = static_cast<unsigned char>(pair[static_cast<std::size_t>(t)]);
      if (!std::isalpha(ch) || ch > 127) throw NonLetter(line.number);
      idx[t] = std::tolower(ch) - 'a';
    }
    if (count.front() == '-') throw NegativeCount(line.number);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(count.data(), count.data() + count.size(), value);
    if (ec != std::errc() || ptr != count.data() + count.size()) throw BadBigram(line.number);
    counts(idx[0], idx[1]) += static_cast<double>(value);
  }
  for (Eigen::Index i = 0; i < 26; ++i) {
    const double s = counts.row(i).sum();
    if (s > 0.0) counts.row(i) /= s;
  }
  std::vector<std::string> labels;
  for (char c = 'a'; c <= 'z'; ++c) labels.emplace_back(1, c);
  return validate_stochastic(std::move(counts), 1e-9, std::move(labels));
}

StochasticMatrix ingest_bigrams(const std::filesystem::path& path, double eta) {
  return ingest_bigrams_text(read_file(path), eta);
}

std::map<std::size_t, Partition> parse_partitions_text(std::string_view text, std::size_t n,
                                                       const std::vector<std::string>& labels) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw ParseError(1, 1, "expected an object keyed by k");
  std::map<std::size_t, Partition> out;
  for (const auto& [key, value] : doc.items()) {
    std::size_t k = 0;
    const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), k);
    if (ec != std::errc() || ptr != key.data() + key.size()) {
      throw ValidationError("partition key '" + key + "' is not a non-negative integer");
    }
    if (!value.is_array()) throw BadAssignment(k, "expected an array");
    const bool label_sets = !value.empty() && value[0].is_array();
    std::vector<std::size_t> assign(n, n);
    if (!label_sets) {
      if (value.size() != n) {
        throw BadAssignment(k, "expected " + std::to_string(n) + " indices, got " + std::to_string(value.size()));
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (!value[i].is_number_integer() || value[i].get<long long>() < 0) {
          throw BadAssignment(k, "index " + std::to_string(i) + " is not a non-negative integer");
        }
        assign[i] = value[i].get<std::size_t>();
      }
    } else {
      if (labels.size() != n) throw LabelMismatch("label sets need a labelled matrix");
      std::map<std::string, std::size_t> index;
      for (std::size_t i = 0; i < n; ++i) index[labels[i]] = i;
      std::set<std::string> seen;
      for (std::size_t j = 0; j < value.size(); ++j) {
        if (!value[j].is_array()) throw BadAssignment(k, "superstate " + std::to_string(j) + " is not a label set");
        for (const auto& l : value[j]) {
          if (!l.is_string()) throw BadAssignment(k, "labels must be strings");
          const auto name = l.get<std::string>();
          auto it = index.find(name);
          if (it == index.end()) throw LabelMismatch("unknown label '" + name + "' in partition k=" + std::to_string(k));
          if (!seen.insert(name).second) throw DuplicateLabel(name);
          assign[it->second] = j;
        }
      }
      if (seen.size() != n) {
        std::string missing;
        for (const auto& l : labels) {
          if (!seen.count(l)) missing += (missing.empty() ? "" : ",") + l;
        }
        throw LabelMismatch("partition k=" + std::to_string(k) + " misses labels " + missing);
      }
    }
    out.emplace(k, Partition(k, std::move(assign)));
  }
  return out;
}

std::map<std::size_t, Partition> parse_partitions(const std::filesystem::path& path, std::size_t n,
                                                  const std::vector<std::string>& labels) {
  return parse_partitions_text(read_file(path), n, labels);
}

std::string format_partitions(const std::map<std::size_t, Partition>& partitions) {
  // keys ordered numerically, one partition per line
  std::string out = "{";
  bool first = true;
  for (const auto& [k, p] : partitions) {
    out += first ? "\n" : ",\n";
    first = false;
    out += "  \"" + std::to_string(k) + "\": " + json(p.assignment()).dump();
  }
  out += "\n}\n";
  return out;
}

void write_partitions(const std::map<std::size_t, Partition>& partitions, const std::filesystem::path& path) {
  write_file(path, format_partitions(partitions));
}

std::string format_models(const std::vector<AnnealEntry>& entries, const std::vector<std::string>& labels) {
  json doc = json::object();
  if (!labels.empty()) doc["labels"] = labels;
  json models = json::array();
  for (const auto& e : entries) {
    json m;
    m["k"] = e.k;
    m["temperature"] = number_or_string(e.T);
    m["assignment"] = e.partition.assignment();
    json psi = json::array();
    for (Eigen::Index j = 0; j < e.model.psi.rows(); ++j) {
      const auto r = row_of(e.model.psi, j);
      psi.push_back(std::vector<double>(r.begin(), r.end()));
    }
    json dist = json::array();
    for (Eigen::Index j = 0; j < e.model.distributions.rows(); ++j) {
      const auto r = row_of(e.model.distributions, j);
      dist.push_back(std::vector<double>(r.begin(), r.end()));
    }
    m["psi"] = std::move(psi);
    m["distributions"] = std::move(dist);
    models.push_back(std::move(m));
  }
  doc["models"] = std::move(models);
  return doc.dump(1) + "\n";
}

std::string format_report(const SelectionReport& report, const ReportMeta& meta, Format format) {
  if (format == Format::Csv) {
    std::string out;
    if (!meta.input_hash.empty()) out += "# input_fnv1a64=" + meta.input_hash + "\n";
    for (const auto& [key, value] : meta.options) out += "# " + key + "=" + value + "\n";
    out += "# k_t=" + std::to_string(report.k_t) + "\n";
    if (report.exact_fit) out += "# exact_fit=" + std::to_string(*report.exact_fit) + "\n";
    out += "k,t_bar,nu\n";
    for (std::size_t r = 0; r < report.k_values.size(); ++r) {
      out += std::to_string(report.k_values[r]) + "," + fmt("%.12f", report.t_bar[r]) + ",";
      if (!std::isnan(report.nu[r])) out += fmt("%.12f", report.nu[r]);
      out += "\n";
    }
    return out;
  }
  json doc;
  doc["input_fnv1a64"] = meta.input_hash;
  json opts = json::object();
  for (const auto& [key, value] : meta.options) opts[key] = value;
  opts["mode"] = mode_name(report.options.mode);
  opts["membership"] = membership_name(report.options.membership);
  opts["floor"] = report.options.floor;
  doc["options"] = std::move(opts);
  doc["k_t"] = report.k_t;
  doc["exact_fit"] = report.exact_fit ? json(*report.exact_fit) : json(nullptr);
  json rows = json::array();
  for (std::size_t r = 0; r < report.k_values.size(); ++r) {
    json row;
    row["k"] = report.k_values[r];
    row["t_bar"] = number_or_string(report.t_bar[r]);
    row["nu"] = number_or_string(report.nu[r]);
    json per = json::array();
    for (double v : report.t_bar_per_superstate[r]) per.push_back(number_or_string(v));
    row["t_bar_per_superstate"] = std::move(per);
    rows.push_back(std::move(row));
  }
  doc["rows"] = std::move(rows);
  return doc.dump(1) + "\n";
}

void write_report(const SelectionReport& report, const ReportMeta& meta, const std::filesystem::path& path,
                  Format format) {
  write_file(path, format_report(report, meta, format));
}

SelectionReport parse_report_json(std::string_view text, ReportMeta* meta) {
  const json doc = parse_json(text);
  SelectionReport rep;
  try {
    rep.k_t = doc.at("k_t").get<std::size_t>();
    if (!doc.at("exact_fit").is_null()) rep.exact_fit = doc["exact_fit"].get<std::size_t>();
    const auto& opts = doc.at("options");
    rep.options.mode = opts.at("mode").get<std::string>() == "plain" ? CovarianceMode::Plain : CovarianceMode::Whiten;
    rep.options.membership =
        opts.at("membership").get<std::string>() == "normalized" ? Membership::Normalized : Membership::Raw;
    rep.options.floor = opts.at("floor").get<double>();
    for (const auto& row : doc.at("rows")) {
      rep.k_values.push_back(row.at("k").get<std::size_t>());
      rep.t_bar.push_back(from_json_number(row.at("t_bar")));
      rep.nu.push_back(from_json_number(row.at("nu")));
      std::vector<double> per;
      for (const auto& v : row.at("t_bar_per_superstate")) per.push_back(from_json_number(v));
      rep.t_bar_per_superstate.push_back(std::move(per));
    }
    if (meta) {
      meta->input_hash = doc.at("input_fnv1a64").get<std::string>();
      meta->options.clear();
      for (const auto& [key, value] : opts.items()) {
        if (key == "mode" || key == "membership" || key == "floor") continue;
        meta->options.emplace_back(key, value.get<std::string>());
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
  return rep;
}

}  // namespace mcagg
