#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "rlg/net/mlp.hpp"

namespace rlg {

// Text checkpoint:
//   # rlg-lab <version> seed=<init seed>   (leading '#' lines are skipped on read)
//   RLG-CKPT 1
//   arch dim=<d> hidden=<w1,w2,...> activation=tanh
//   seed <init seed>
//   layer <index> <fan_in> <fan_out>
//   <fan_out lines of fan_in weights>   (row-major, shortest round-trip decimal)
//   <one line of fan_out biases>
//   ...
//   end
inline constexpr const char* kCheckpointMagic = "RLG-CKPT 1";

void write_checkpoint(const VelocityModel& model, std::ostream& out);
std::string checkpoint_text(const VelocityModel& model);
VelocityModel read_checkpoint(std::istream& in);

void save_checkpoint(const VelocityModel& model, const std::filesystem::path& path);
VelocityModel load_checkpoint(const std::filesystem::path& path);

// Shortest decimal that reads back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

}  // namespace rlg
