#include "hfke/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hfke {

namespace {

void write_u32_le(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64_le(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

void write_f64_le(std::ostream& out, double v) {
  write_u64_le(out, std::bit_cast<std::uint64_t>(v));
}

std::uint32_t read_u32_le(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64_le(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double read_f64_le(std::istream& in) { return std::bit_cast<double>(read_u64_le(in)); }

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  return in;
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void save_coeff_csv(const CoeffVector& coeffs, const std::filesystem::path& path) {
  auto out = open_out(path, std::ios::out);
  out << "alpha,beta,n_modes\n";
  out << format_double(coeffs.spec.alpha) << ',' << format_double(coeffs.spec.beta) << ','
      << coeffs.spec.n_modes << '\n';
  for (int n = 0; n < coeffs.values.size(); ++n) out << format_double(coeffs.values[n]) << '\n';
}

CoeffVector load_coeff_csv(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::in);
  std::string line;
  if (!std::getline(in, line) || line != "alpha,beta,n_modes")
    throw std::runtime_error("coeff csv: bad header in " + path.string());
  if (!std::getline(in, line)) throw std::runtime_error("coeff csv: missing spec line");
  std::replace(line.begin(), line.end(), ',', ' ');
  std::istringstream spec_line(line);
  CoeffVector out;
  if (!(spec_line >> out.spec.alpha >> out.spec.beta >> out.spec.n_modes))
    throw std::runtime_error("coeff csv: malformed spec line");
  out.spec.validate();
  out.values.resize(out.spec.size());
  for (int n = 0; n < out.spec.size(); ++n) {
    if (!std::getline(in, line))
      throw std::runtime_error("coeff csv: expected " + std::to_string(out.spec.size()) +
                               " coefficients");
    out.values[n] = std::stod(line);
  }
  return out;
}

void save_matrix_bin(const Eigen::MatrixXd& m, const BasisSpec& spec,
                     const std::filesystem::path& path) {
  if (m.rows() != m.cols() || m.rows() != spec.size())
    throw std::invalid_argument("save_matrix_bin: matrix must be (N+1) x (N+1)");
  auto out = open_out(path, std::ios::out | std::ios::binary);
  write_u64_le(out, static_cast<std::uint64_t>(spec.size()));
  write_f64_le(out, spec.alpha);
  write_f64_le(out, spec.beta);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) write_f64_le(out, m(i, j));
}

Eigen::MatrixXd load_matrix_bin(const std::filesystem::path& path, BasisSpec* spec) {
  auto in = open_in(path, std::ios::in | std::ios::binary);
  const auto n1 = static_cast<int>(read_u64_le(in));
  const double alpha = read_f64_le(in);
  const double beta = read_f64_le(in);
  if (n1 < 1 || n1 > (1 << 20)) throw std::runtime_error("matrix bin: implausible size header");
  Eigen::MatrixXd m(n1, n1);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n1; ++j) m(i, j) = read_f64_le(in);
  if (!in) throw std::runtime_error("matrix bin: truncated file " + path.string());
  if (spec) *spec = BasisSpec{alpha, beta, n1 - 1};
  return m;
}

void save_matrix_csv(const Eigen::MatrixXd& m, const std::filesystem::path& path) {
  auto out = open_out(path, std::ios::out);
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

std::uint64_t fnv1a64(const unsigned char* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

BankSaveInfo save_bank(const WindowBank& bank, const std::filesystem::path& path,
                       const std::filesystem::path& manifest_csv) {
  if (bank.windows.empty()) throw std::invalid_argument("save_bank: empty bank");
  for (const auto& w : bank.windows)
    if (w.propagators.size() != 1)
      throw std::invalid_argument(
          "save_bank: only single-interval (time-invariant) banks serialize");

  const auto n1 = static_cast<std::size_t>(bank.n_modes() + 1);
  const std::size_t expected_entries = bank.windows.size() * n1 * n1;
  if (bank.storage_entries() != expected_entries)
    throw std::logic_error("save_bank: storage accounting mismatch");

  auto out = open_out(path, std::ios::out | std::ios::binary);
  out.write("HFKE", 4);
  write_u32_le(out, 1u);  // version
  write_u32_le(out, static_cast<std::uint32_t>(bank.windows.size()));
  write_u32_le(out, static_cast<std::uint32_t>(n1));
  write_f64_le(out, bank.windows.front().spec.alpha);
  write_f64_le(out, bank.half_width);
  write_f64_le(out, bank.overlap);
  write_f64_le(out, bank.dt_obs);

  std::vector<std::uint64_t> checksums;
  checksums.reserve(bank.windows.size());
  for (const auto& w : bank.windows) {
    std::vector<unsigned char> bytes;
    bytes.reserve(8 * (1 + n1 * n1));
    auto push_f64 = [&bytes](double v) {
      const auto u = std::bit_cast<std::uint64_t>(v);
      for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<unsigned char>((u >> (8 * i)) & 0xff));
    };
    push_f64(w.spec.beta);
    const Eigen::MatrixXd& phi = w.propagators.front();
    for (int i = 0; i < phi.rows(); ++i)
      for (int j = 0; j < phi.cols(); ++j) push_f64(phi(i, j));
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    checksums.push_back(fnv1a64(bytes.data(), bytes.size()));
  }
  out.flush();
  if (!out) throw std::runtime_error("save_bank: write failed for " + path.string());
  out.close();

  if (!manifest_csv.empty()) {
    auto manifest = open_out(manifest_csv, std::ios::out);
    manifest << "window_index,beta,checksum_fnv1a64\n";
    for (std::size_t j = 0; j < bank.windows.size(); ++j) {
      std::ostringstream hex;
      hex << std::hex << checksums[j];
      manifest << j << ',' << format_double(bank.windows[j].spec.beta) << ',' << hex.str()
               << '\n';
    }
  }

  BankSaveInfo info;
  info.matrix_entries = expected_entries;
  info.file_bytes = std::filesystem::file_size(path);
  const std::uintmax_t expected_bytes =
      4 + 4 + 4 + 4 + 4 * 8 + bank.windows.size() * (8 + 8 * n1 * n1);
  if (info.file_bytes != expected_bytes)
    throw std::logic_error("save_bank: file size does not match the storage contract");
  return info;
}

WindowBank load_bank(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::in | std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "HFKE", 4) != 0)
    throw std::runtime_error("load_bank: bad magic in " + path.string());
  const std::uint32_t version = read_u32_le(in);
  if (version != 1u) throw std::runtime_error("load_bank: unsupported version");
  const std::uint32_t n_windows = read_u32_le(in);
  const std::uint32_t n1 = read_u32_le(in);
  if (n_windows == 0 || n1 == 0) throw std::runtime_error("load_bank: empty bank");

  WindowBank bank;
  const double alpha = read_f64_le(in);
  bank.half_width = read_f64_le(in);
  bank.overlap = read_f64_le(in);
  bank.dt_obs = read_f64_le(in);
  bank.shift_threshold = bank.half_width;

  bank.windows.resize(n_windows);
  for (auto& w : bank.windows) {
    const double beta = read_f64_le(in);
    w.spec = BasisSpec{alpha, beta, static_cast<int>(n1) - 1};
    Eigen::MatrixXd phi(n1, n1);
    for (std::uint32_t i = 0; i < n1; ++i)
      for (std::uint32_t j = 0; j < n1; ++j) phi(static_cast<int>(i), static_cast<int>(j)) = read_f64_le(in);
    w.propagators.push_back(std::move(phi));
  }
  if (!in) throw std::runtime_error("load_bank: truncated file " + path.string());

  const BasisSpec origin{alpha, 0.0, static_cast<int>(n1) - 1};
  bank.rule = projection_rule(origin);
  bank.node_basis = basis_node_matrix(origin, bank.rule);
  const Eigen::Map<const Eigen::VectorXd> mw(bank.rule.modified_weights.data(), bank.rule.size());
  bank.mass_weights = bank.node_basis * mw / alpha;
  bank.domain_half_width = bank.windows.back().spec.beta + bank.half_width;
  bank.tolerance = 0.0;
  return bank;
}

void save_path_csv(const Path& path, const std::filesystem::path& file) {
  auto out = open_out(file, std::ios::out);
  out << "t,x,y\n";
  for (std::size_t i = 0; i < path.times.size(); ++i)
    out << format_double(path.times[i]) << ',' << format_double(path.states[i]) << ','
        << format_double(path.observations[i]) << '\n';
}

void save_online_csv(const OnlineResult& r, const std::filesystem::path& file) {
  auto out = open_out(file, std::ios::out);
  out << "t,mean,mass,window_index,shift_count\n";
  for (std::size_t i = 0; i < r.t.size(); ++i)
    out << format_double(r.t[i]) << ',' << format_double(r.mean[i]) << ','
        << format_double(r.mass[i]) << ',' << r.window_index[i] << ',' << r.shift_count[i]
        << '\n';
}

void save_pf_csv(const PfResult& r, const std::filesystem::path& file) {
  auto out = open_out(file, std::ios::out);
  out << "t,mean,ess,resampled\n";
  for (std::size_t i = 0; i < r.t.size(); ++i)
    out << format_double(r.t[i]) << ',' << format_double(r.mean[i]) << ','
        << format_double(r.ess[i]) << ',' << r.resampled[i] << '\n';
}

void save_shifts_csv(const std::vector<ShiftEvent>& shifts, const std::filesystem::path& file) {
  auto out = open_out(file, std::ios::out);
  out << "step,from_window,to_window,mean_before,mean_after,l2_loss\n";
  for (const auto& s : shifts)
    out << s.step << ',' << s.from_window << ',' << s.to_window << ','
        << format_double(s.mean_before) << ',' << format_double(s.mean_after) << ','
        << format_double(s.l2_loss) << '\n';
}

void save_snapshots_csv(const std::vector<DensitySnapshot>& snaps,
                        const std::filesystem::path& file) {
  auto out = open_out(file, std::ios::out);
  out << "t,x,u_normalized\n";
  for (const auto& snap : snaps)
    for (std::size_t i = 0; i < snap.x.size(); ++i)
      out << format_double(snap.t) << ',' << format_double(snap.x[i]) << ','
          << format_double(snap.u[i]) << '\n';
}

}  // namespace hfke
