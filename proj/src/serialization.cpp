#include "dpp/serialization.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dpp {

void save_projection(const std::string& path, const ProjectionMatrix& p) {
  nlohmann::json header;
  header["n"] = p.space.size();
  header["rank"] = p.rank;
  header["space"] = p.space.to_json();
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("save_projection: cannot open " + tmp);
    out << header.dump() << "\n";
    const Eigen::MatrixXd& m = p.P.mat();
    for (int i = 0; i < m.rows(); ++i) {
      for (int j = 0; j < m.cols(); ++j) {
        const double v = m(i, j);
        out.write(reinterpret_cast<const char*>(&v), sizeof(double));
      }
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("save_projection: rename to " + path + " failed");
  }
}

ProjectionMatrix load_projection(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_projection: cannot open " + path);
  std::string header_line;
  if (!std::getline(in, header_line)) {
    throw std::runtime_error("load_projection: missing header in " + path);
  }
  const nlohmann::json header = nlohmann::json::parse(header_line);
  const int n = header.at("n").get<int>();
  const int rank = header.at("rank").get<int>();
  GroundSpace space = GroundSpace::from_json(header.at("space"));
  if (space.size() != n) {
    throw std::runtime_error("load_projection: header n does not match space size");
  }
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double v;
      if (!in.read(reinterpret_cast<char*>(&v), sizeof(double))) {
        throw std::runtime_error("load_projection: truncated matrix payload");
      }
      m(i, j) = v;
    }
  }
  ProjectionMatrix out{std::move(space), HermitianMatrix(std::move(m), 1e-8), rank, 0.0};
  return out;
}

void save_draws(const std::string& path, const std::vector<Configuration>& draws) {
  std::ostringstream out;
  for (const auto& d : draws) {
    for (std::size_t i = 0; i < d.indices.size(); ++i) {
      if (i) out << ',';
      out << d.indices[i];
    }
    out << '\n';
  }
  write_text_atomic(path, out.str());
}

std::vector<Configuration> load_draws(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_draws: cannot open " + path);
  std::vector<Configuration> out;
  std::string line;
  while (std::getline(in, line)) {
    Configuration c;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) c.indices.push_back(std::stoi(tok));
    }
    out.push_back(std::move(c));
  }
  return out;
}

KernelTable load_kernel_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_kernel_table: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("load_kernel_table: empty file " + path);
  }
  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) cols.push_back(tok);
  }
  const bool with_derivs = cols.size() == 5;
  if (!with_derivs && cols.size() != 3) {
    throw std::runtime_error("load_kernel_table: header must be x,A,B or x,A,B,dA,dB");
  }
  std::vector<double> x, a, b, da, db;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<double> row;
    while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
    if (row.size() != cols.size()) {
      throw std::runtime_error("load_kernel_table: line " + std::to_string(lineno) +
                               " has " + std::to_string(row.size()) + " fields");
    }
    x.push_back(row[0]);
    a.push_back(row[1]);
    b.push_back(row[2]);
    if (with_derivs) {
      da.push_back(row[3]);
      db.push_back(row[4]);
    }
  }
  KernelTable out;
  out.kernel = kernel_from_table(x, a, b, da, db);
  out.x = std::move(x);
  return out;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("write_text_atomic: cannot open " + tmp);
    out << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("write_text_atomic: rename to " + path + " failed");
  }
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace dpp
