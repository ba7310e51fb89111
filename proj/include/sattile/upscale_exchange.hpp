#pragma once

// Directory-exchange protocol for external upscalers (e.g. a learned
// super-resolution model running in another runtime).
//
//   <dir>/in/NNNNNN.png      input tiles, numbered from 000000 in batch order
//   <dir>/request.txt        one line per tile: "NNNNNN.png <factor>"
//   <dir>/out/NNNNNN.png     outputs written by the command
//
// The command receives <dir> as its only argument and must exit with 0.

#include <cstdio>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "png_io.hpp"
#include "process.hpp"
#include "raster.hpp"
#include "text.hpp"

namespace sattile {

struct TileFault {
  std::string tile_id;
  std::string reason;
};

/// Raised when one or more tiles violate the exchange contract.
class UpscaleError : public ProtocolError {
 public:
  explicit UpscaleError(std::vector<TileFault> faults)
      : ProtocolError(describe(faults)), faults_(std::move(faults)) {}

  const std::vector<TileFault>& faults() const noexcept { return faults_; }

 private:
  static std::string describe(const std::vector<TileFault>& faults) {
    std::string s = "external upscaler failed:";
    for (const auto& f : faults) s += "\n  tile " + f.tile_id + ": " + f.reason;
    return s;
  }

  std::vector<TileFault> faults_;
};

inline std::string exchange_tile_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu", index);
  return buf;
}

inline std::vector<PixelGrid> external_upscale(std::span<const PixelGrid> tiles, int factor,
                                               const std::filesystem::path& exchange, const std::string& command) {
  namespace fs = std::filesystem;
  if (factor < 1) throw std::invalid_argument("upscale factor must be >= 1");
  const fs::path in_dir = exchange / "in";
  const fs::path out_dir = exchange / "out";
  fs::remove_all(in_dir);
  fs::remove_all(out_dir);
  fs::create_directories(in_dir);
  fs::create_directories(out_dir);

  std::string request;
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    const auto name = exchange_tile_name(i) + ".png";
    write_png((in_dir / name).string(), tiles[i]);
    request += name + " " + std::to_string(factor) + "\n";
  }
  write_file((exchange / "request.txt").string(), request);

  const int status = run_command(command, exchange.string());
  if (status != 0) {
    std::vector<TileFault> faults;
    for (std::size_t i = 0; i < tiles.size(); ++i)
      faults.push_back({exchange_tile_name(i), "command exited with status " + std::to_string(status)});
    if (faults.empty()) faults.push_back({"-", "command exited with status " + std::to_string(status)});
    throw UpscaleError(std::move(faults));
  }

  std::vector<PixelGrid> out;
  std::vector<TileFault> faults;
  out.reserve(tiles.size());
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    const auto id = exchange_tile_name(i);
    const fs::path p = out_dir / (id + ".png");
    if (!fs::exists(p)) {
      faults.push_back({id, "missing output " + p.string()});
      continue;
    }
    try {
      PixelGrid g = read_png(p.string());
      const int ew = tiles[i].width() * factor;
      const int eh = tiles[i].height() * factor;
      if (g.width() != ew || g.height() != eh) {
        faults.push_back({id, "dimension mismatch: expected " + std::to_string(ew) + "x" + std::to_string(eh) +
                                  ", got " + std::to_string(g.width()) + "x" + std::to_string(g.height())});
        continue;
      }
      out.push_back(std::move(g));
    } catch (const Error& e) {
      faults.push_back({id, e.what()});
    }
  }
  if (!faults.empty()) throw UpscaleError(std::move(faults));
  return out;
}

}  // namespace sattile
