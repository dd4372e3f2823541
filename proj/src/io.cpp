#include "entwb/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "entwb/errors.hpp"

namespace entwb {

namespace {

using ordered_json = nlohmann::ordered_json;

double parse_number(const std::string& token) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw ParseError("not a number: '" + token + "'");
  }
  while (used < token.size() &&
         std::isspace(static_cast<unsigned char>(token[used]))) {
    ++used;
  }
  if (used != token.size()) throw ParseError("trailing junk in '" + token + "'");
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string token;
  std::stringstream ss(line);
  while (std::getline(ss, token, ',')) out.push_back(token);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

// Entropy values carry 12 decimal digits in reports.
double round12(double x) { return std::nearbyint(x * 1e12) / 1e12; }

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

MarginalDistribution parse_marginal_text(const std::string& text, double tol) {
  std::size_t start = 0;
  while (start < text.size() &&
         std::isspace(static_cast<unsigned char>(text[start]))) {
    ++start;
  }
  if (start == text.size()) throw ParseError("marginal input is empty");

  if (text[start] == '{' || text[start] == '[') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("marginal JSON: ") + e.what());
    }
    try {
      if (j.is_array()) {
        return validate_marginal(j.get<std::vector<double>>(), tol);
      }
      if (j.contains("probs")) {
        std::vector<std::string> labels;
        if (j.contains("labels")) {
          labels = j.at("labels").get<std::vector<std::string>>();
        }
        return validate_marginal(j.at("probs").get<std::vector<double>>(),
                                 std::move(labels), tol);
      }
      if (j.contains("family")) {
        const std::string family = j.at("family").get<std::string>();
        if (family == "geometric") {
          const double p = j.at("p").get<double>();
          const double tail_tol = j.value("tail_tol", 1e-12);
          return truncate_denumerable(GeometricFamily{p}, tail_tol);
        }
        throw ParseError("unknown marginal family '" + family + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("marginal JSON: ") + e.what());
    }
    throw ParseError("marginal JSON needs 'probs' or 'family'");
  }

  // CSV: one probability per line.
  std::vector<double> probs;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    std::string trimmed;
    for (char c : line) {
      if (!std::isspace(static_cast<unsigned char>(c))) trimmed += c;
    }
    if (trimmed.empty() || trimmed[0] == '#') continue;
    probs.push_back(parse_number(trimmed));
  }
  if (probs.empty()) throw ParseError("marginal CSV has no values");
  return validate_marginal(std::move(probs), tol);
}

MarginalDistribution parse_marginal_file(const std::string& path, double tol) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_marginal_text(buffer.str(), tol);
}

void write_table_csv(const CouplingTable& t, std::ostream& os) {
  os << "marginals";
  for (int s = 0; s < t.cols(); ++s) {
    os << ',' << format_double(t.col_marginal()[static_cast<std::size_t>(s)]);
  }
  os << '\n';
  const auto dense = t.dense();
  for (int r = 0; r < t.rows(); ++r) {
    os << format_double(t.row_marginal()[static_cast<std::size_t>(r)]);
    for (int s = 0; s < t.cols(); ++s) {
      os << ','
         << format_double(dense[static_cast<std::size_t>(r)]
                               [static_cast<std::size_t>(s)]);
    }
    os << '\n';
  }
}

std::string table_to_csv(const CouplingTable& t) {
  std::ostringstream os;
  write_table_csv(t, os);
  return os.str();
}

CouplingTable read_table_csv(std::istream& is, double tol) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("table CSV is empty");
  const auto header = split_csv_line(line);
  if (header.size() < 2) throw ParseError("table CSV header has no columns");
  std::vector<double> col_masses;
  for (std::size_t s = 1; s < header.size(); ++s) {
    col_masses.push_back(parse_number(header[s]));
  }

  std::vector<double> row_masses;
  std::vector<Cell> cells;
  int r = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != col_masses.size() + 1) {
      throw ParseError("table CSV row " + std::to_string(r) +
                       " has wrong width");
    }
    row_masses.push_back(parse_number(fields[0]));
    for (std::size_t s = 1; s < fields.size(); ++s) {
      const double v = parse_number(fields[s]);
      if (v != 0.0) {
        cells.push_back({r, static_cast<int>(s - 1), v});
      }
    }
    ++r;
  }
  if (r == 0) throw ParseError("table CSV has no body rows");

  // Accept truncated marginals: any missing mass is recorded as tail.
  CompensatedSum rs, cs;
  for (double v : row_masses) rs.add(v);
  for (double v : col_masses) cs.add(v);
  const int cols = static_cast<int>(col_masses.size());
  MarginalDistribution row_marginal = make_truncated_marginal(
      std::move(row_masses), std::max(0.0, 1.0 - rs.value()), tol);
  MarginalDistribution col_marginal = make_truncated_marginal(
      std::move(col_masses), std::max(0.0, 1.0 - cs.value()), tol);
  return CouplingTable::from_cells(r, cols, std::move(cells),
                                   std::move(row_marginal),
                                   std::move(col_marginal),
                                   Provenance::explicit_table, tol);
}

CouplingTable table_from_csv(const std::string& text, double tol) {
  std::istringstream is(text);
  return read_table_csv(is, tol);
}

std::string report_to_json(const CouplingTable& t, const GreedyTrace* trace) {
  const EntropyReport rep = entropy_report(t);
  constexpr double kLog2 = 0.69314718055994530941723212145818;

  ordered_json j;
  j["h_x"] = round12(rep.h_x);
  j["h_y"] = round12(rep.h_y);
  j["h_xy"] = round12(rep.h_xy);
  j["mutual_information"] = round12(rep.mutual_information);
  j["upper_bound_slack"] = round12(rep.upper_bound_slack);
  j["lower_bound_slack"] = round12(rep.lower_bound_slack);
  // Readability only; comparisons stay in nats.
  j["h_x_bits"] = round12(rep.h_x / kLog2);
  j["h_y_bits"] = round12(rep.h_y / kLog2);
  j["h_xy_bits"] = round12(rep.h_xy / kLog2);
  j["mutual_information_bits"] = round12(rep.mutual_information / kLog2);
  j["provenance"] = provenance_name(t.provenance());
  j["rows"] = t.rows();
  j["cols"] = t.cols();
  j["support_cells"] = t.support_size();

  ordered_json ties = ordered_json::array();
  if (trace != nullptr) {
    for (std::size_t i = 0; i < trace->steps.size(); ++i) {
      const GreedyStep& s = trace->steps[i];
      if (s.rows_tied > 1 || s.cols_tied > 1) {
        ordered_json e;
        e["step"] = i;
        e["rows_tied"] = s.rows_tied;
        e["cols_tied"] = s.cols_tied;
        ties.push_back(e);
      }
    }
  }
  j["tie_break_log"] = ties;

  const double tail =
      t.row_marginal().tail_mass() + t.col_marginal().tail_mass();
  j["tail_error_bound"] = tail_entropy_bound(tail, t.support_size() + 1);
  return j.dump(2) + "\n";
}

}  // namespace entwb
