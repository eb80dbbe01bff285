#include "rlg/net/checkpoint.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "rlg/error.hpp"
#include "rlg/version.hpp"

namespace rlg {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string tok; ss >> tok;) out.push_back(tok);
  return out;
}

std::string next_line(std::istream& in, int& lineno) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Parse, "checkpoint truncated after line " + std::to_string(lineno));
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::string value_of(const std::string& token, std::string_view key) {
  if (token.rfind(std::string(key) + "=", 0) != 0)
    throw Error(ErrorCode::Parse, "checkpoint: expected '" + std::string(key) + "=' in '" + token + "'");
  return token.substr(key.size() + 1);
}

std::uint64_t parse_u64(std::string_view text) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw Error(ErrorCode::Parse, "expected unsigned integer, got '" + std::string(text) + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw Error(ErrorCode::Parse, "expected number, got '" + std::string(text) + "'");
  return v;
}

void write_checkpoint(const VelocityModel& model, std::ostream& out) {
  out << "# " << kToolName << ' ' << kToolVersion << " seed=" << model.init_seed() << '\n';
  out << kCheckpointMagic << '\n';
  out << "arch dim=" << model.dim() << " hidden=";
  for (std::size_t i = 0; i < model.hidden().size(); ++i) out << (i ? "," : "") << model.hidden()[i];
  out << " activation=tanh\n";
  out << "seed " << model.init_seed() << '\n';
  const auto p = model.parameters();
  for (std::size_t l = 0; l < model.layers().size(); ++l) {
    const auto& ly = model.layers()[l];
    out << "layer " << l << ' ' << ly.fan_in << ' ' << ly.fan_out << '\n';
    for (std::size_t r = 0; r < ly.fan_out; ++r) {
      for (std::size_t c = 0; c < ly.fan_in; ++c) out << (c ? " " : "") << format_double(p[ly.weight_offset + r * ly.fan_in + c]);
      out << '\n';
    }
    for (std::size_t r = 0; r < ly.fan_out; ++r) out << (r ? " " : "") << format_double(p[ly.bias_offset + r]);
    out << '\n';
  }
  out << "end\n";
}

std::string checkpoint_text(const VelocityModel& model) {
  std::ostringstream ss;
  write_checkpoint(model, ss);
  return ss.str();
}

VelocityModel read_checkpoint(std::istream& in) {
  int lineno = 0;
  std::string first = next_line(in, lineno);
  while (!first.empty() && first.front() == '#') first = next_line(in, lineno);
  if (first != kCheckpointMagic) throw Error(ErrorCode::Parse, "checkpoint: bad magic line");

  const auto arch = split_ws(next_line(in, lineno));
  if (arch.size() != 4 || arch[0] != "arch") throw Error(ErrorCode::Parse, "checkpoint: bad architecture line");
  const int dim = static_cast<int>(parse_u64(value_of(arch[1], "dim")));
  std::vector<std::size_t> hidden;
  const std::string widths = value_of(arch[2], "hidden");
  for (std::size_t pos = 0; pos < widths.size();) {
    const std::size_t comma = std::min(widths.find(',', pos), widths.size());
    hidden.push_back(static_cast<std::size_t>(parse_u64(std::string_view(widths).substr(pos, comma - pos))));
    pos = comma + 1;
  }
  if (value_of(arch[3], "activation") != "tanh") throw Error(ErrorCode::Parse, "checkpoint: unsupported activation");

  const auto seed = split_ws(next_line(in, lineno));
  if (seed.size() != 2 || seed[0] != "seed") throw Error(ErrorCode::Parse, "checkpoint: bad seed line");

  VelocityModel model(dim, hidden);
  model.set_init_seed(parse_u64(seed[1]));
  auto p = model.parameters();
  auto read_row = [&](std::size_t offset, std::size_t count) {
    const auto toks = split_ws(next_line(in, lineno));
    if (toks.size() != count)
      throw Error(ErrorCode::Parse, "checkpoint line " + std::to_string(lineno) + ": expected " +
                                        std::to_string(count) + " values");
    for (std::size_t i = 0; i < count; ++i) p[offset + i] = parse_double(toks[i]);
  };
  for (std::size_t l = 0; l < model.layers().size(); ++l) {
    const auto& ly = model.layers()[l];
    const auto hdr = split_ws(next_line(in, lineno));
    if (hdr.size() != 4 || hdr[0] != "layer" || parse_u64(hdr[1]) != l || parse_u64(hdr[2]) != ly.fan_in ||
        parse_u64(hdr[3]) != ly.fan_out)
      throw Error(ErrorCode::Parse, "checkpoint line " + std::to_string(lineno) + ": layer header mismatch");
    for (std::size_t r = 0; r < ly.fan_out; ++r) read_row(ly.weight_offset + r * ly.fan_in, ly.fan_in);
    read_row(ly.bias_offset, ly.fan_out);
  }
  if (next_line(in, lineno) != "end") throw Error(ErrorCode::Parse, "checkpoint: missing end marker");
  return model;
}

void save_checkpoint(const VelocityModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write_checkpoint(model, out);
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

VelocityModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace rlg
