#pragma once

// Rendering of Monte Carlo summaries in the simulation-table layout:
// per design, rows are (n x statistic) and columns are (estimator x rho)
// blocks. CSV output is the long format used by the harness.

#include <span>
#include <string>

#include "wsmatch/mc.hpp"

namespace wsmatch {

enum class TableFormat { csv, markdown };

std::optional<TableFormat> parse_table_format(std::string_view text);

// Markdown replicates the table row order (per n: MEAN BIAS, MEDIAN BIAS,
// RMSE, MAD) at four decimal places; cells absent from `summaries` render
// empty, and unreliable cells are starred. CSV is the long format of
// write_summaries_csv and round-trips through read_summaries_csv.
std::string emit_tables(std::span<const McSummary> summaries, TableFormat format);

}  // namespace wsmatch
