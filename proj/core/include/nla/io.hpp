#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nla/fock.hpp"
#include "nla/homodyne.hpp"
#include "nla/wigner.hpp"

namespace nla::io {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

/// Stamped on every output file so it can be traced to its run.
struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
};

/// `# config_hash=<hash> seed=<seed>` comment line written at the top of CSV outputs.
std::string provenance_comment(const Provenance& prov);

/// Writes `text` to `path`, creating parent directories. Throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Sidecar metadata path for a dataset CSV: foo.csv -> foo.meta.json.
std::filesystem::path dataset_sidecar(const std::filesystem::path& csv_path);

/// CSV rows `theta,x,tag` after the provenance comment and header, plus the
/// JSON sidecar (eta, seed, counts_per_phase, phases, description). Reading
/// back yields a dataset equal to the one written.
void write_dataset(const std::filesystem::path& csv_path, const QuadratureDataset& data,
                   const Provenance& prov);
QuadratureDataset read_dataset(const std::filesystem::path& csv_path);

/// {"n_max", "real": [[...]], "imag": [[...]]}.
nlohmann::json density_matrix_to_json(const DensityMatrix& rho);
DensityMatrix density_matrix_from_json(const nlohmann::json& j);

/// One CSV per part: row m holds elements (m, 0..n_max).
std::string matrix_part_csv(const DensityMatrix& rho, bool imaginary, const Provenance& prov);

/// Rows `x,p,value`.
std::string wigner_csv(const WignerGrid& w, const Provenance& prov);
/// {"x_axis", "p_axis", "values"} with values row-major over x then p.
nlohmann::json wigner_to_json(const WignerGrid& w);

/// Rows `iteration,log_likelihood`.
std::string log_likelihood_csv(std::span<const double> trace, const Provenance& prov);

/// Splits on commas, skipping comment lines starting with '#'.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

} // namespace nla::io
