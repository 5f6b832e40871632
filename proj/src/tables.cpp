#include "wsmatch/tables.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>
#include <vector>

namespace wsmatch {

std::optional<TableFormat> parse_table_format(std::string_view text) {
  std::string low;
  for (char c : text) low += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (low == "csv") return TableFormat::csv;
  if (low == "markdown" || low == "md") return TableFormat::markdown;
  return std::nullopt;
}

namespace {

const char* column_label(Estimator estimator) {
  switch (estimator) {
    case Estimator::ckt_ate: return "CKT";
    case Estimator::ckt_ate_weighted: return "CKT-W";
    case Estimator::vy_infeasible: return "VY";
    case Estimator::rc_dte: return "RC";
  }
  return "?";
}

std::string short_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", value);
  return buf;
}

std::string stat_cell(const McSummary& s, int which) {
  const double value = which == 0   ? s.mean_bias
                       : which == 1 ? s.median_bias
                       : which == 2 ? s.rmse
                                    : s.mad;
  if (std::isnan(value)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  std::string out = buf;
  if (s.unreliable) out += " \\*";
  return out;
}

}  // namespace

std::string emit_tables(std::span<const McSummary> summaries, TableFormat format) {
  if (format == TableFormat::csv) {
    std::ostringstream out;
    write_summaries_csv(out, summaries);
    return out.str();
  }

  // Index the cells and collect the axes per design.
  std::map<Design, std::map<std::tuple<Estimator, double, std::size_t>, McSummary>> cells;
  std::map<Design, std::vector<Estimator>> estimators;
  std::map<Design, std::vector<double>> rhos;
  std::map<Design, std::vector<std::size_t>> ns;
  for (const McSummary& s : summaries) {
    cells[s.design][{s.estimator, s.rho, s.n}] = s;
    estimators[s.design].push_back(s.estimator);
    rhos[s.design].push_back(s.rho);
    ns[s.design].push_back(s.n);
  }
  const auto dedupe = [](auto& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };

  static const char* kStatNames[4] = {"MEAN BIAS", "MEDIAN BIAS", "RMSE", "MAD"};
  std::ostringstream out;
  out << "# Monte Carlo summaries\n\nStatistics are scaled by the true parameter.\n";
  bool any_unreliable = false;
  for (auto& [design, cell_map] : cells) {
    auto& est = estimators[design];
    auto& rho = rhos[design];
    auto& nn = ns[design];
    dedupe(est);
    dedupe(rho);
    dedupe(nn);

    out << "\n## " << to_string(design) << "\n\n";
    out << "| n | statistic |";
    for (Estimator e : est) {
      for (double r : rho) out << ' ' << column_label(e) << " rho=" << short_number(r) << " |";
    }
    out << "\n|---|---|";
    for (std::size_t k = 0; k < est.size() * rho.size(); ++k) out << "---|";
    out << '\n';
    for (std::size_t n : nn) {
      for (int stat = 0; stat < 4; ++stat) {
        out << "| " << n << " | " << kStatNames[stat] << " |";
        for (Estimator e : est) {
          for (double r : rho) {
            const auto it = cell_map.find({e, r, n});
            if (it == cell_map.end()) {
              out << "  |";
            } else {
              any_unreliable = any_unreliable || it->second.unreliable;
              out << ' ' << stat_cell(it->second, stat) << " |";
            }
          }
        }
        out << '\n';
      }
    }
  }
  if (any_unreliable) {
    out << "\n\\* more than 10% of replications failed in this cell.\n";
  }
  return out.str();
}

}  // namespace wsmatch
