#include "nla/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "nla/errors.hpp"

namespace nla::io {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  if (res.ec != std::errc()) {
    throw IoError("format_double: conversion failed");
  }
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw IoError("cannot parse number '" + std::string(text) + "'");
  }
  return value;
}

std::string provenance_comment(const Provenance& prov) {
  return "# config_hash=" + prov.config_hash + " seed=" + std::to_string(prov.seed) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << text;
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path dataset_sidecar(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p.replace_extension(".meta.json");
  return p;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty() || line.front() == '#') {
      continue;
    }
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) {
        break;
      }
      start = comma + 1;
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

void write_dataset(const std::filesystem::path& csv_path, const QuadratureDataset& data,
                   const Provenance& prov) {
  std::string csv = provenance_comment(prov);
  csv += "theta,x,tag\n";
  for (const auto& r : data.records) {
    csv += format_double(r.theta);
    csv += ',';
    csv += format_double(r.x);
    csv += ',';
    csv += to_string(r.tag);
    csv += '\n';
  }
  write_text(csv_path, csv);

  nlohmann::ordered_json meta;
  meta["eta"] = data.eta;
  meta["seed"] = data.seed;
  meta["counts_per_phase"] = data.counts_per_phase;
  meta["phases"] = data.phases;
  meta["description"] = data.description;
  meta["config_hash"] = prov.config_hash;
  write_text(dataset_sidecar(csv_path), meta.dump(2) + "\n");
}

QuadratureDataset read_dataset(const std::filesystem::path& csv_path) {
  const auto rows = parse_csv(read_text(csv_path));
  if (rows.empty() || rows.front() != std::vector<std::string>{"theta", "x", "tag"}) {
    throw IoError(csv_path.string() + ": expected header 'theta,x,tag'");
  }
  QuadratureDataset data;
  data.records.reserve(rows.size() - 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i];
    if (f.size() != 3) {
      throw IoError(csv_path.string() + ": row " + std::to_string(i) + " needs three fields");
    }
    try {
      data.records.push_back({parse_double(f[0]), parse_double(f[1]), parse_sample_tag(f[2])});
    } catch (const PreconditionError& e) {
      throw IoError(csv_path.string() + ": " + e.what());
    }
  }

  const auto sidecar = dataset_sidecar(csv_path);
  try {
    const auto meta = nlohmann::json::parse(read_text(sidecar));
    data.eta = meta.at("eta").get<double>();
    data.seed = meta.at("seed").get<std::uint64_t>();
    data.counts_per_phase = meta.at("counts_per_phase").get<int>();
    data.phases = meta.at("phases").get<std::vector<double>>();
    data.description = meta.value("description", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(sidecar.string() + ": " + e.what());
  }
  return data;
}

nlohmann::json density_matrix_to_json(const DensityMatrix& rho) {
  const CMatrix& r = rho.elements();
  nlohmann::json re = nlohmann::json::array();
  nlohmann::json im = nlohmann::json::array();
  for (Eigen::Index m = 0; m < r.rows(); ++m) {
    nlohmann::json rr = nlohmann::json::array();
    nlohmann::json ri = nlohmann::json::array();
    for (Eigen::Index n = 0; n < r.cols(); ++n) {
      rr.push_back(r(m, n).real());
      ri.push_back(r(m, n).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  return {{"n_max", rho.cutoff().n_max()}, {"real", std::move(re)}, {"imag", std::move(im)}};
}

DensityMatrix density_matrix_from_json(const nlohmann::json& j) {
  try {
    const int n_max = j.at("n_max").get<int>();
    const auto re = j.at("real").get<std::vector<std::vector<double>>>();
    const auto im = j.at("imag").get<std::vector<std::vector<double>>>();
    const auto dim = static_cast<std::size_t>(n_max) + 1;
    if (re.size() != dim || im.size() != dim) {
      throw IoError("density matrix JSON: row count does not match n_max");
    }
    CMatrix r(n_max + 1, n_max + 1);
    for (std::size_t m = 0; m < dim; ++m) {
      if (re[m].size() != dim || im[m].size() != dim) {
        throw IoError("density matrix JSON: ragged row " + std::to_string(m));
      }
      for (std::size_t n = 0; n < dim; ++n) {
        r(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) = complex(re[m][n], im[m][n]);
      }
    }
    return DensityMatrix(std::move(r));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("density matrix JSON: ") + e.what());
  }
}

std::string matrix_part_csv(const DensityMatrix& rho, bool imaginary, const Provenance& prov) {
  std::string out = provenance_comment(prov);
  const CMatrix& r = rho.elements();
  for (Eigen::Index m = 0; m < r.rows(); ++m) {
    for (Eigen::Index n = 0; n < r.cols(); ++n) {
      if (n > 0) {
        out += ',';
      }
      out += format_double(imaginary ? r(m, n).imag() : r(m, n).real());
    }
    out += '\n';
  }
  return out;
}

std::string wigner_csv(const WignerGrid& w, const Provenance& prov) {
  std::string out = provenance_comment(prov);
  out += "x,p,value\n";
  for (std::size_t i = 0; i < w.x_axis.size(); ++i) {
    for (std::size_t j = 0; j < w.p_axis.size(); ++j) {
      out += format_double(w.x_axis[i]);
      out += ',';
      out += format_double(w.p_axis[j]);
      out += ',';
      out += format_double(w.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      out += '\n';
    }
  }
  return out;
}

nlohmann::json wigner_to_json(const WignerGrid& w) {
  std::vector<double> values;
  values.reserve(w.x_axis.size() * w.p_axis.size());
  for (std::size_t i = 0; i < w.x_axis.size(); ++i) {
    for (std::size_t j = 0; j < w.p_axis.size(); ++j) {
      values.push_back(w.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
  }
  return {{"x_axis", w.x_axis}, {"p_axis", w.p_axis}, {"values", std::move(values)}};
}

std::string log_likelihood_csv(std::span<const double> trace, const Provenance& prov) {
  std::string out = provenance_comment(prov);
  out += "iteration,log_likelihood\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += format_double(trace[i]);
    out += '\n';
  }
  return out;
}

} // namespace nla::io
