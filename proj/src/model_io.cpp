#include "sblab/model_io.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "sblab/errors.hpp"

namespace sblab {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void fail(int line, const std::string& message) {
  throw ParseError("line " + std::to_string(line) + ": " + message);
}

Expr parse_expr_at(int line, const std::string& text) {
  try {
    return parse_expr(text);
  } catch (const SyntaxError& e) {
    fail(line, std::string("bad expression: ") + e.what());
  }
}

double parse_number(int line, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end == t.c_str() || *end != '\0') fail(line, "bad number '" + t + "'");
  return v;
}

struct Line {
  int number;
  std::string text;
};

struct Section {
  int header_line = 0;
  std::vector<Line> lines;
};

std::map<std::string, Section> split_sections(const std::string& text,
                                              std::vector<std::string>* order) {
  std::map<std::string, Section> sections;
  std::istringstream in(text);
  std::string raw;
  std::string current;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos)
      raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      current = trim(line.substr(1, line.size() - 2));
      if (current.empty()) fail(line_no, "empty section name");
      if (sections.count(current))
        fail(line_no, "duplicate section [" + current + "]");
      sections[current].header_line = line_no;
      if (order) order->push_back(current);
      continue;
    }
    if (current.empty()) fail(line_no, "content before first section header");
    sections[current].lines.push_back({line_no, line});
  }
  return sections;
}

std::pair<std::string, std::string> split_assignment(const Line& l) {
  const auto eq = l.text.find('=');
  if (eq == std::string::npos) fail(l.number, "expected 'name = value'");
  const std::string key = trim(l.text.substr(0, eq));
  const std::string value = trim(l.text.substr(eq + 1));
  if (key.empty() || value.empty()) fail(l.number, "expected 'name = value'");
  return {key, value};
}

// One `field = expr` line per declared field, any order, no extras.
std::vector<Expr> parse_per_field(const Section& sec,
                                  const std::string& section_name,
                                  const BalanceSystem& sys) {
  std::vector<Expr> out(sys.field_names.size());
  std::vector<bool> seen(sys.field_names.size(), false);
  for (const auto& l : sec.lines) {
    auto [key, value] = split_assignment(l);
    const int idx = sys.index_of(key);
    if (idx < 0)
      fail(l.number, "unknown field '" + key + "' in [" + section_name + "]");
    if (seen[idx])
      fail(l.number, "duplicate entry for field '" + key + "'");
    seen[idx] = true;
    out[idx] = parse_expr_at(l.number, value);
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i])
      throw ParseError("section [" + section_name + "] is missing field '" +
                       sys.field_names[i] + "'");
  return out;
}

Expr parse_single_expr(const std::map<std::string, Section>& sections,
                       const std::string& name) {
  auto it = sections.find(name);
  if (it == sections.end())
    throw ParseError("missing section [" + name + "]");
  if (it->second.lines.size() != 1)
    throw ParseError("section [" + name +
                     "] must contain exactly one expression");
  const Line& l = it->second.lines.front();
  return parse_expr_at(l.number, l.text);
}

}  // namespace

BalanceSystem parse_model_text(const std::string& text) {
  const auto sections = split_sections(text, nullptr);
  for (const char* required : {"system", "fields", "density", "production"})
    if (!sections.count(required))
      throw ParseError(std::string("missing section [") + required + "]");

  BalanceSystem sys;

  bool have_dim = false;
  for (const auto& l : sections.at("system").lines) {
    auto [key, value] = split_assignment(l);
    if (key == "name") {
      sys.name = value;
    } else if (key == "spatial_dim") {
      sys.spatial_dim = static_cast<int>(parse_number(l.number, value));
      have_dim = true;
    } else {
      fail(l.number, "unknown key '" + key + "' in [system]");
    }
  }
  if (sys.name.empty()) throw ParseError("[system] is missing 'name'");
  if (!have_dim) throw ParseError("[system] is missing 'spatial_dim'");
  if (sys.spatial_dim < 1 || sys.spatial_dim > 3)
    throw ParseError("spatial_dim must be 1, 2 or 3");

  for (const auto& l : sections.at("fields").lines) {
    // "<name> in [<lo>, <hi>]"
    const auto in_pos = l.text.find(" in ");
    if (in_pos == std::string::npos)
      fail(l.number, "expected '<field> in [lo, hi]'");
    const std::string fname = trim(l.text.substr(0, in_pos));
    std::string range = trim(l.text.substr(in_pos + 4));
    if (range.size() < 2 || range.front() != '[' || range.back() != ']')
      fail(l.number, "expected '<field> in [lo, hi]'");
    range = range.substr(1, range.size() - 2);
    const auto comma = range.find(',');
    if (comma == std::string::npos)
      fail(l.number, "expected '<field> in [lo, hi]'");
    Interval iv{parse_number(l.number, range.substr(0, comma)),
                parse_number(l.number, range.substr(comma + 1))};
    if (!(iv.lo < iv.hi)) fail(l.number, "empty interval for '" + fname + "'");
    sys.field_names.push_back(fname);
    sys.domain_box.push_back(iv);
  }
  if (sys.field_names.empty()) throw ParseError("[fields] declares no fields");

  sys.densities = parse_per_field(sections.at("density"), "density", sys);
  for (int A = 1; A <= sys.spatial_dim; ++A) {
    const std::string sec_name = "flux." + std::to_string(A);
    auto it = sections.find(sec_name);
    if (it == sections.end())
      throw ParseError("missing section [" + sec_name + "]");
    sys.fluxes.push_back(parse_per_field(it->second, sec_name, sys));
  }
  sys.productions =
      parse_per_field(sections.at("production"), "production", sys);

  for (const auto& [sec_name, sec] : sections) {
    if (sec_name == "system" || sec_name == "fields" ||
        sec_name == "density" || sec_name == "production")
      continue;
    if (sec_name.rfind("flux.", 0) == 0) {
      char* end = nullptr;
      const long A = std::strtol(sec_name.c_str() + 5, &end, 10);
      if (*end == '\0' && A >= 1 && A <= sys.spatial_dim) continue;
    }
    fail(sec.header_line, "unexpected section [" + sec_name + "]");
  }

  try {
    sys.validate();
  } catch (const DimensionMismatchError& e) {
    throw ParseError(e.what());
  }
  return sys;
}

BalanceSystem load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_model_text(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string render_model_text(const BalanceSystem& sys) {
  std::ostringstream out;
  out << "[system]\n"
      << "name = " << sys.name << "\n"
      << "spatial_dim = " << sys.spatial_dim << "\n\n";
  out << "[fields]\n";
  for (int i = 0; i < sys.field_count(); ++i)
    out << sys.field_names[i] << " in [" << format_double(sys.domain_box[i].lo)
        << ", " << format_double(sys.domain_box[i].hi) << "]\n";
  auto block = [&](const std::string& header, const std::vector<Expr>& exprs) {
    out << "\n[" << header << "]\n";
    for (int i = 0; i < sys.field_count(); ++i)
      out << sys.field_names[i] << " = " << exprs[i].str() << "\n";
  };
  block("density", sys.densities);
  for (int A = 0; A < sys.spatial_dim; ++A)
    block("flux." + std::to_string(A + 1), sys.fluxes[A]);
  block("production", sys.productions);
  return out.str();
}

SblCandidate parse_sbl_text(const std::string& text,
                            const BalanceSystem& sys) {
  const auto sections = split_sections(text, nullptr);
  SblCandidate cand;
  cand.K0 = parse_single_expr(sections, "K0");
  for (int A = 1; A <= sys.spatial_dim; ++A)
    cand.KA.push_back(
        parse_single_expr(sections, "K." + std::to_string(A)));
  cand.Q = parse_single_expr(sections, "Q");

  for (const auto& [sec_name, sec] : sections) {
    if (sec_name == "K0" || sec_name == "Q") continue;
    if (sec_name.rfind("K.", 0) == 0) {
      char* end = nullptr;
      const long A = std::strtol(sec_name.c_str() + 2, &end, 10);
      if (*end == '\0' && A >= 1 && A <= sys.spatial_dim) continue;
    }
    fail(sec.header_line, "unexpected section [" + sec_name + "]");
  }

  auto check_vars = [&](const Expr& e, const std::string& where) {
    for (const auto& v : e.free_vars())
      if (sys.index_of(v) < 0)
        throw ParseError("[" + where + "] uses unknown variable '" + v + "'");
  };
  check_vars(cand.K0, "K0");
  for (int A = 0; A < sys.spatial_dim; ++A)
    check_vars(cand.KA[A], "K." + std::to_string(A + 1));
  check_vars(cand.Q, "Q");
  return cand;
}

SblCandidate load_sbl_file(const std::string& path, const BalanceSystem& sys) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open candidate file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_sbl_text(buf.str(), sys);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string render_sbl_text(const SblCandidate& cand) {
  std::ostringstream out;
  out << "[K0]\n" << cand.K0.str() << "\n";
  for (std::size_t A = 0; A < cand.KA.size(); ++A)
    out << "\n[K." << (A + 1) << "]\n" << cand.KA[A].str() << "\n";
  out << "\n[Q]\n" << cand.Q.str() << "\n";
  return out.str();
}

}  // namespace sblab
