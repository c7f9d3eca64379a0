#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "ritzcg/pcg.hpp"
#include "ritzcg/ritz.hpp"
#include "ritzcg/types.hpp"

namespace ritzcg {

/// Fixed 17-significant-digit formatting used by every CSV writer, so equal
/// runs produce byte-identical files.
std::string format_number(double value);

void write_matrix_csv(std::ostream& out, const Matrix& m);
void write_matrix_csv(const std::string& path, const Matrix& m);
Matrix read_matrix_csv(std::istream& in);
Matrix read_matrix_csv(const std::string& path);

void write_vector_csv(const std::string& path, const Vector& v,
                      const std::string& header = "");
Vector read_vector_csv(const std::string& path);

/// Columns: iter, alpha, beta, gamma, delta, corr_mnorm_sq, t_frob_sq, energy_decrement.
void write_trace_csv(std::ostream& out, const SolveTrace& trace);
void write_trace_csv(const std::string& path, const SolveTrace& trace);

void write_picard_csv(const std::string& path, const std::vector<PicardRow>& rows);
void write_lcurve_csv(const std::string& path, const std::vector<LCurvePoint>& points);

struct SweepRow {
  double lambda, mnorm_sq, err_offset;
};
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

}  // namespace ritzcg
