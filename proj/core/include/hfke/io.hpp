#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hfke/basis.hpp"
#include "hfke/filter.hpp"
#include "hfke/particle.hpp"

namespace hfke {

/// Shortest round-trip decimal representation of a double.
std::string format_double(double value);

// --- CoeffVector: CSV with an alpha,beta,n_modes header, one coefficient per line.
void save_coeff_csv(const CoeffVector& coeffs, const std::filesystem::path& path);
CoeffVector load_coeff_csv(const std::filesystem::path& path);

// --- Matrices: flat binary, header (N+1 as little-endian u64, alpha/beta as
// f64) followed by row-major f64 entries; plus a CSV debug dump.
void save_matrix_bin(const Eigen::MatrixXd& m, const BasisSpec& spec,
                     const std::filesystem::path& path);
Eigen::MatrixXd load_matrix_bin(const std::filesystem::path& path, BasisSpec* spec = nullptr);
void save_matrix_csv(const Eigen::MatrixXd& m, const std::filesystem::path& path);

// --- Window bank: single binary file
//   magic "HFKE", version u32, J+1 u32, N+1 u32,
//   alpha f64, L_w f64, overlap f64, dt_obs f64,
//   then per window: beta f64, Phi row-major f64.
// The manifest CSV lists one row per window with its center and an FNV-1a
// checksum of the window's bytes. Only single-interval banks serialize.
struct BankSaveInfo {
  std::size_t matrix_entries = 0;  // (J+1)*(N+1)^2, asserted on write
  std::uintmax_t file_bytes = 0;
};
BankSaveInfo save_bank(const WindowBank& bank, const std::filesystem::path& path,
                       const std::filesystem::path& manifest_csv = {});
WindowBank load_bank(const std::filesystem::path& path);

// --- Series CSVs.
void save_path_csv(const Path& path, const std::filesystem::path& file);            // t,x,y
void save_online_csv(const OnlineResult& r, const std::filesystem::path& file);     // t,mean,mass,window_index,shift_count
void save_pf_csv(const PfResult& r, const std::filesystem::path& file);             // t,mean,ess,resampled
void save_shifts_csv(const std::vector<ShiftEvent>& shifts, const std::filesystem::path& file);
void save_snapshots_csv(const std::vector<DensitySnapshot>& snaps,
                        const std::filesystem::path& file);                          // t,x,u_normalized

std::uint64_t fnv1a64(const unsigned char* data, std::size_t n);

}  // namespace hfke
