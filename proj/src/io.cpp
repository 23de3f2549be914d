#include "blochwave/io.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace blochwave::io {

void ensure_directory(const std::string& path) {
  if (!path.empty()) std::filesystem::create_directories(path);
}

void write_complex_array(const std::string& path,
                         const std::vector<cdouble>& data) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(cdouble)));
}

std::vector<cdouble> read_complex_array(const std::string& path) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) throw Error("cannot open " + path);
  const auto bytes = static_cast<std::size_t>(f.tellg());
  if (bytes % sizeof(cdouble) != 0) {
    throw Error(path + " is not an array of complex float64 pairs");
  }
  std::vector<cdouble> data(bytes / sizeof(cdouble));
  f.seekg(0);
  f.read(reinterpret_cast<char*>(data.data()),
         static_cast<std::streamsize>(bytes));
  return data;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open " + path + " for writing");
  f << content;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

void write_csv(const std::string& path,
               const std::vector<std::string>& metadata,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (const auto& m : metadata) os << "# " << m << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) {
    os << columns[i] << (i + 1 < columns.size() ? "," : "\n");
  }
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      os << row[i] << (i + 1 < row.size() ? "," : "\n");
    }
  }
  write_text(path, os.str());
}

nlohmann::json sigma_to_json(const SigmaPoint& s) {
  nlohmann::json j;
  j["k_frac"] = std::vector<double>(s.k.frac.data(),
                                    s.k.frac.data() + s.k.frac.size());
  j["energy"] = s.energy;
  return j;
}

nlohmann::json certificate_to_json(const ClosureCertificate& cert) {
  nlohmann::json j;
  j["order"] = cert.order;
  j["closed"] = cert.closed;
  j["tol_k"] = cert.tol.tol_k;
  j["tol_E"] = cert.tol.tol_E;
  j["tuples_checked"] = cert.tuples_checked;
  j["violations"] = nlohmann::json::array();
  for (const auto& v : cert.violations) {
    nlohmann::json vj;
    vj["tuple"] = v.tuple;
    vj["sigma"] = sigma_to_json(v.sigma);
    vj["matched_band"] = v.matched_band;
    j["violations"].push_back(vj);
  }
  return j;
}

std::string json_hash(const nlohmann::json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace blochwave::io
