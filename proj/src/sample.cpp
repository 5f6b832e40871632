#include "wsmatch/sample.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace wsmatch {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_sample_csv(std::ostream& out, const Sample& sample) {
  out << "y,w,d,x,z,p\n";
  for (const Observation& o : sample.obs) {
    out << format_double(o.y) << ',';
    if (o.w == Sector::a) out << 'a';
    else if (o.w == Sector::b) out << 'b';
    out << ',' << o.d << ',' << format_double(o.x) << ',' << format_double(o.z) << ','
        << format_double(o.p) << '\n';
  }
}

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double_field(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(std::string("sample csv: bad ") + what + " field '" + s + "'");
  }
}

}  // namespace

Sample read_sample_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("sample csv: empty input");
  if (split_csv_row(line) != std::vector<std::string>{"y", "w", "d", "x", "z", "p"}) {
    throw std::runtime_error("sample csv: unexpected header '" + line + "'");
  }
  Sample sample;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_row(line);
    if (fields.size() != 6) throw std::runtime_error("sample csv: expected 6 fields, got row '" + line + "'");
    Observation o;
    o.y = parse_double_field(fields[0], "y");
    if (fields[1].empty()) o.w = Sector::none;
    else if (fields[1] == "a") o.w = Sector::a;
    else if (fields[1] == "b") o.w = Sector::b;
    else throw std::runtime_error("sample csv: bad w field '" + fields[1] + "'");
    if (fields[2] == "0") o.d = 0;
    else if (fields[2] == "1") o.d = 1;
    else throw std::runtime_error("sample csv: bad d field '" + fields[2] + "'");
    o.x = parse_double_field(fields[3], "x");
    o.z = parse_double_field(fields[4], "z");
    o.p = parse_double_field(fields[5], "p");
    sample.obs.push_back(o);
  }
  sample.spec.n = sample.obs.size();
  return sample;
}

}  // namespace wsmatch
