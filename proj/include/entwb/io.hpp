#pragma once

#include <iosfwd>
#include <string>

#include "entwb/core.hpp"
#include "entwb/coupling.hpp"

namespace entwb {

/// Reads a marginal from disk. Two formats are accepted:
///   JSON object: {"probs": [...], "labels": [...]?} or
///                {"family": "geometric", "p": 0.5, "tail_tol": 1e-12}
///   CSV: one probability per line.
/// ParseError on malformed input; validation errors propagate.
MarginalDistribution parse_marginal_file(const std::string& path,
                                         double tol = kMassTol);
MarginalDistribution parse_marginal_text(const std::string& text,
                                         double tol = kMassTol);

/// Table CSV: header row carries the column marginals, the first column the
/// row marginals, the body the cells; 17 significant digits so a written
/// table re-parses to identical doubles.
void write_table_csv(const CouplingTable& t, std::ostream& os);
std::string table_to_csv(const CouplingTable& t);
CouplingTable read_table_csv(std::istream& is, double tol = kMassTol);
CouplingTable table_from_csv(const std::string& text, double tol = kMassTol);

/// Entropy report as JSON text (stable field order, 12 decimal digits in
/// nats plus read-only bits fields). Always contains h_x, h_y, h_xy,
/// mutual_information, both bound slacks, provenance, the tie-break log and
/// the tail error bound.
std::string report_to_json(const CouplingTable& t,
                           const GreedyTrace* trace = nullptr);

/// Fixed-format double used by every writer: shortest representation that
/// round-trips (17 significant digits).
std::string format_double(double x);

}  // namespace entwb
