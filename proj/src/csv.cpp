#include "ritzcg/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace ritzcg {

std::string format_number(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_number(m(i, j));
    }
    out << '\n';
  }
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  require(out.good(), "write_matrix_csv: cannot open " + path);
  write_matrix_csv(out, m);
}

Matrix read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && rows.front().size() != row.size())
      throw Error("read_matrix_csv: ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "read_matrix_csv: cannot open " + path);
  return read_matrix_csv(in);
}

void write_vector_csv(const std::string& path, const Vector& v,
                      const std::string& header) {
  std::ofstream out(path);
  require(out.good(), "write_vector_csv: cannot open " + path);
  if (!header.empty()) out << header << '\n';
  for (Index i = 0; i < v.size(); ++i) out << format_number(v[i]) << '\n';
}

Vector read_vector_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "read_vector_csv: cannot open " + path);
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      values.push_back(std::stod(line));
    } catch (const std::exception&) {
      if (values.empty()) continue;  // header line
      throw Error("read_vector_csv: bad value '" + line + "'");
    }
  }
  Vector v(values.size());
  for (size_t i = 0; i < values.size(); ++i) v[i] = values[i];
  return v;
}

void write_trace_csv(std::ostream& out, const SolveTrace& trace) {
  out << "iter,alpha,beta,gamma,delta,corr_mnorm_sq,t_frob_sq,energy_decrement\n";
  for (int i = 0; i < trace.m(); ++i) {
    const IterationRecord& r = trace.records[i];
    out << i << ',' << format_number(r.alpha) << ',' << format_number(r.beta) << ','
        << format_number(r.gamma) << ',' << format_number(r.delta) << ','
        << format_number(r.corr_mnorm_sq) << ',' << format_number(r.t_frob_sq) << ','
        << format_number(r.energy_decrement) << '\n';
  }
}

void write_trace_csv(const std::string& path, const SolveTrace& trace) {
  std::ofstream out(path);
  require(out.good(), "write_trace_csv: cannot open " + path);
  write_trace_csv(out, trace);
}

void write_picard_csv(const std::string& path, const std::vector<PicardRow>& rows) {
  std::ofstream out(path);
  require(out.good(), "write_picard_csv: cannot open " + path);
  out << "j,theta,abs_r_a,lambda_abs_r_m,abs_r_total\n";
  for (const PicardRow& row : rows)
    out << row.j << ',' << format_number(row.theta) << ','
        << format_number(row.abs_r_a) << ',' << format_number(row.lambda_abs_r_m)
        << ',' << format_number(row.abs_r_total) << '\n';
}

void write_lcurve_csv(const std::string& path, const std::vector<LCurvePoint>& points) {
  std::ofstream out(path);
  require(out.good(), "write_lcurve_csv: cannot open " + path);
  out << "i,mnorm_sq,err_drop_sq,err_offset\n";
  for (size_t i = 0; i < points.size(); ++i)
    out << i << ',' << format_number(points[i].mnorm_sq) << ','
        << format_number(points[i].err_drop_sq) << ','
        << format_number(points[i].err_offset) << '\n';
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  require(out.good(), "write_sweep_csv: cannot open " + path);
  out << "lambda,mnorm_sq,err_offset\n";
  for (const SweepRow& row : rows)
    out << format_number(row.lambda) << ',' << format_number(row.mnorm_sq) << ','
        << format_number(row.err_offset) << '\n';
}

}  // namespace ritzcg
