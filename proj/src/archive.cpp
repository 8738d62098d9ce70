#include "shellhom/archive.hpp"

#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "shellhom/errors.hpp"
#include "shellhom/mesh_io.hpp"

namespace shellhom {

void FieldFile::add(const std::string& name, int rows, int cols,
                    std::vector<double> values) {
  if (name.empty() || name.find_first_of(" \t\n") != std::string::npos)
    throw IoError("dataset name must be a single token: '" + name + "'");
  if (rows < 0 || cols <= 0 ||
      values.size() != static_cast<size_t>(rows) * cols)
    throw IoError("dataset '" + name + "' shape does not match its values");
  if (has(name)) throw IoError("duplicate dataset '" + name + "'");
  data_.push_back({name, rows, cols, std::move(values)});
}

bool FieldFile::has(const std::string& name) const {
  for (const auto& d : data_)
    if (d.name == name) return true;
  return false;
}

const Dataset& FieldFile::get(const std::string& name, int rows,
                              int cols) const {
  for (const auto& d : data_) {
    if (d.name != name) continue;
    if ((rows >= 0 && d.rows != rows) || (cols >= 0 && d.cols != cols))
      throw IoError("dataset '" + name + "' has shape " +
                    std::to_string(d.rows) + "x" + std::to_string(d.cols) +
                    ", expected " + std::to_string(rows) + "x" +
                    std::to_string(cols));
    return d;
  }
  throw IoError("archive has no dataset '" + name + "'");
}

std::string FieldFile::to_string() const {
  std::string out;
  out += "$ShellhomFields " + std::to_string(kFieldFormatVersion) + "\n";
  char hx[32];
  std::snprintf(hx, sizeof hx, "%016" PRIx64, config_hash);
  out += "$Config ";
  out += hx;
  out += "\n";
  for (const auto& d : data_) {
    out += "$Data " + d.name + " " + std::to_string(d.rows) + " " +
           std::to_string(d.cols) + "\n";
    for (int r = 0; r < d.rows; ++r) {
      for (int c = 0; c < d.cols; ++c) {
        if (c) out += ' ';
        out += format_double(d.values[static_cast<size_t>(r) * d.cols + c]);
      }
      out += '\n';
    }
  }
  out += "$End\n";
  return out;
}

namespace {

struct LineReader {
  std::istringstream in;
  int lineno = 0;
  explicit LineReader(const std::string& text) : in(text) {}
  bool next(std::string& line) {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw IoError("field file line " + std::to_string(lineno) + ": " + msg);
  }
};

}  // namespace

FieldFile FieldFile::from_string(const std::string& text) {
  LineReader lr(text);
  std::string line;
  if (!lr.next(line)) lr.fail("empty input");
  {
    std::istringstream h(line);
    std::string magic;
    int version = -1;
    h >> magic >> version;
    if (magic != "$ShellhomFields") lr.fail("not a field file");
    if (version != kFieldFormatVersion)
      lr.fail("unsupported format version " + std::to_string(version));
  }
  FieldFile ff;
  if (!lr.next(line)) lr.fail("missing $Config");
  {
    std::istringstream h(line);
    std::string tag, hex;
    h >> tag >> hex;
    if (tag != "$Config" || hex.size() != 16) lr.fail("malformed $Config");
    uint64_t v = 0;
    for (char c : hex) {
      if (!std::isxdigit(static_cast<unsigned char>(c)))
        lr.fail("malformed $Config");
      v = v * 16 +
          (std::isdigit(static_cast<unsigned char>(c))
               ? c - '0'
               : std::tolower(static_cast<unsigned char>(c)) - 'a' + 10);
    }
    ff.config_hash = v;
  }
  while (true) {
    if (!lr.next(line)) lr.fail("missing $End");
    if (line == "$End") break;
    std::istringstream h(line);
    std::string tag, name;
    int rows = -1, cols = -1;
    h >> tag >> name >> rows >> cols;
    if (tag != "$Data" || h.fail()) lr.fail("expected a $Data header");
    if (rows < 0 || cols <= 0) lr.fail("bad shape for dataset '" + name + "'");
    std::vector<double> vals;
    vals.reserve(static_cast<size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r) {
      if (!lr.next(line)) lr.fail("truncated dataset '" + name + "'");
      std::istringstream row(line);
      for (int c = 0; c < cols; ++c) {
        double x;
        row >> x;
        if (row.fail())
          lr.fail("bad value in dataset '" + name + "' row " +
                  std::to_string(r));
        vals.push_back(x);
      }
      std::string extra;
      if (row >> extra)
        lr.fail("extra value in dataset '" + name + "' row " +
                std::to_string(r));
    }
    ff.add(name, rows, cols, std::move(vals));
  }
  return ff;
}

void FieldFile::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  const std::string text = to_string();
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

FieldFile FieldFile::read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str());
}

namespace {

std::vector<double> flat(const NodalField& f) { return f; }

NodalField nodal_from(const Dataset& d) {
  return NodalField(d.values.begin(), d.values.end());
}

}  // namespace

FieldFile cell_solution_to_fields(const CellSolutionSet& sol,
                                  uint64_t config_hash) {
  FieldFile ff;
  ff.config_hash = config_hash;
  ff.add("alpha_I", 1, 3, {sol.alpha_I[0], sol.alpha_I[1], sol.alpha_I[2]});
  ff.add("metric_H", 1, 3,
         {sol.metric.H[0], sol.metric.H[1], sol.metric.H[2]});
  std::vector<double> dh;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) dh.push_back(sol.metric.dH[i][j]);
  ff.add("metric_dH", 3, 3, std::move(dh));
  ff.add("subdivisions", 1, 1, {static_cast<double>(sol.subdivisions)});
  std::vector<double> chat;
  for (int p = 0; p < 6; ++p)
    for (int q = 0; q < 6; ++q) chat.push_back(sol.C_hat(p, q));
  ff.add("C_hat", 6, 6, std::move(chat));
  ff.add("asymmetry", 1, 1, {sol.asymmetry});
  ff.add("max_mean_correction", 1, 1, {sol.max_mean_correction});
  const int n = static_cast<int>(sol.N1[0].size()) / 3;
  for (int q = 0; q < 6; ++q)
    ff.add("N1_" + std::to_string(q), n, 3, flat(sol.N1[q]));
  for (int j = 0; j < 3; ++j)
    for (int q = 0; q < 6; ++q)
      ff.add("N2_" + std::to_string(j + 1) + "_" + std::to_string(q), n, 3,
             flat(sol.N2[j][q]));
  for (int q = 0; q < 6; ++q)
    ff.add("W_" + std::to_string(q), n, 3, flat(sol.W[q]));
  return ff;
}

CellSolutionSet cell_solution_from_fields(const FieldFile& ff,
                                          const TetMesh& cell) {
  CellSolutionSet sol;
  const int n = cell.n_nodes();
  const auto& aI = ff.get("alpha_I", 1, 3).values;
  sol.alpha_I = Vec3(aI[0], aI[1], aI[2]);
  const auto& H = ff.get("metric_H", 1, 3).values;
  const auto& dH = ff.get("metric_dH", 3, 3).values;
  for (int i = 0; i < 3; ++i) {
    sol.metric.H[i] = H[i];
    for (int j = 0; j < 3; ++j) sol.metric.dH[i][j] = dH[3 * i + j];
  }
  sol.metric.Hprod = H[0] * H[1] * H[2];
  sol.subdivisions =
      static_cast<int>(ff.get("subdivisions", 1, 1).values[0]);
  const auto& chat = ff.get("C_hat", 6, 6).values;
  for (int p = 0; p < 6; ++p)
    for (int q = 0; q < 6; ++q) sol.C_hat(p, q) = chat[6 * p + q];
  sol.asymmetry = ff.get("asymmetry", 1, 1).values[0];
  sol.max_mean_correction = ff.get("max_mean_correction", 1, 1).values[0];
  for (int q = 0; q < 6; ++q)
    sol.N1[q] = nodal_from(ff.get("N1_" + std::to_string(q), n, 3));
  for (int j = 0; j < 3; ++j)
    for (int q = 0; q < 6; ++q)
      sol.N2[j][q] = nodal_from(ff.get(
          "N2_" + std::to_string(j + 1) + "_" + std::to_string(q), n, 3));
  for (int q = 0; q < 6; ++q)
    sol.W[q] = nodal_from(ff.get("W_" + std::to_string(q), n, 3));
  sol.D = compute_D(cell, sol.metric, sol.N1);
  return sol;
}

}  // namespace shellhom
