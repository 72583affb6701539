#include "gfam/matio.hpp"

#include <array>
#include <bit>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "gfam/error.hpp"
#include "json.hpp"

namespace gfam {

namespace {

constexpr std::array<char, 4> kMagic = {'G', 'F', 'A', 'M'};
constexpr std::uint32_t kIdxImages = 0x00000803;
constexpr std::uint32_t kIdxLabels = 0x00000801;

std::string os_cause() { return std::strerror(errno); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + ": " + os_cause());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string() + ": " + os_cause());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string() + ": " + os_cause());
}

template <typename T>
T load_le(const unsigned char* p) {
  T v = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) v |= static_cast<T>(p[b]) << (8 * b);
  return v;
}

template <typename T>
void store_le(T v, unsigned char* p) {
  for (std::size_t b = 0; b < sizeof(T); ++b) p[b] = static_cast<unsigned char>(v >> (8 * b));
}

std::uint32_t load_be32(const unsigned char* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

DataMatrix parse_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::size_t pos = 0;
  bool first_line = true;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::size_t end = eol;
    if (end > pos && text[end - 1] == '\r') --end;
    const bool header = first_line && end > pos && text[pos] == '#';
    first_line = false;
    if (!header && end > pos) {
      std::vector<double> row;
      std::size_t cur = pos;
      while (true) {
        while (cur < end && text[cur] == ' ') ++cur;
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(text.data() + cur, text.data() + end, v);
        if (ec != std::errc()) {
          // from_chars rejects the overflow case for huge literals too
          throw FormatError("malformed csv number", cur);
        }
        row.push_back(v);
        cur = static_cast<std::size_t>(ptr - text.data());
        while (cur < end && text[cur] == ' ') ++cur;
        if (cur == end) break;
        if (text[cur] != ',') throw FormatError("expected ',' in csv", cur);
        ++cur;
      }
      if (!rows.empty() && row.size() != rows.front().size())
        throw FormatError("ragged csv row " + std::to_string(rows.size()), pos);
      rows.push_back(std::move(row));
    }
    pos = eol + 1;
  }
  if (rows.empty()) throw FormatError("empty csv", 0);
  DataMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

DataMatrix parse_bin(const std::string& bytes) {
  if (bytes.size() < 20) throw FormatError("truncated gfam_bin header", bytes.size());
  if (std::memcmp(bytes.data(), kMagic.data(), 4) != 0) throw FormatError("bad gfam_bin magic", 0);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const auto rows = load_le<std::uint64_t>(p + 4);
  const auto cols = load_le<std::uint64_t>(p + 12);
  if (rows == 0 || cols == 0) throw FormatError("gfam_bin with zero extent", 4);
  if (rows > (bytes.size() - 20) / 8 / cols || 20 + rows * cols * 8 != bytes.size())
    throw FormatError("gfam_bin payload size mismatch", std::min<std::uint64_t>(bytes.size(), 20));
  DataMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  const unsigned char* q = p + 20;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j, q += 8)
      m(i, j) = std::bit_cast<double>(load_le<std::uint64_t>(q));
  return m;
}

DataMatrix parse_idx_images(const std::string& bytes) {
  if (bytes.size() < 16) throw FormatError("truncated idx header", bytes.size());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (load_be32(p) != kIdxImages) throw FormatError("idx magic is not 0x00000803", 0);
  const std::uint64_t count = load_be32(p + 4);
  const std::uint64_t h = load_be32(p + 8);
  const std::uint64_t w = load_be32(p + 12);
  if (count == 0 || h == 0 || w == 0) throw FormatError("idx with zero extent", 4);
  if (16 + count * h * w != bytes.size())
    throw FormatError("idx payload size mismatch", std::min<std::uint64_t>(bytes.size(), 16));
  DataMatrix m(static_cast<Eigen::Index>(h * w), static_cast<Eigen::Index>(count));
  const unsigned char* q = p + 16;
  for (Eigen::Index img = 0; img < m.cols(); ++img)
    for (Eigen::Index px = 0; px < m.rows(); ++px) m(px, img) = static_cast<double>(*q++) / 255.0;
  return m;
}

}  // namespace

std::string to_string(MatrixFormat f) {
  switch (f) {
    case MatrixFormat::csv: return "csv";
    case MatrixFormat::gfam_bin: return "gfam_bin";
    case MatrixFormat::idx: return "idx";
  }
  return "?";
}

std::string to_string(Termination t) { return t == Termination::tol_met ? "tol_met" : "max_iter"; }

MatrixFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  const auto name = path.filename().string();
  if (ext == ".csv" || ext == ".txt") return MatrixFormat::csv;
  if (ext == ".idx" || name.find("idx3") != std::string::npos) return MatrixFormat::idx;
  if (ext == ".gfam" || ext == ".bin") return MatrixFormat::gfam_bin;
  throw ArgumentError("cannot infer matrix format from '" + name + "'");
}

void validate_finite(const DataMatrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (!std::isfinite(m(i, j)))
        throw ValidationError("non-finite entry at (" + std::to_string(i) + "," +
                              std::to_string(j) + ")");
}

DataMatrix load_matrix(const std::filesystem::path& path, MatrixFormat format) {
  const std::string bytes = read_file(path);
  DataMatrix m;
  switch (format) {
    case MatrixFormat::csv: m = parse_csv(bytes); break;
    case MatrixFormat::gfam_bin: m = parse_bin(bytes); break;
    case MatrixFormat::idx: m = parse_idx_images(bytes); break;
  }
  validate_finite(m);
  return m;
}

void save_matrix(const DataMatrix& m, const std::filesystem::path& path, MatrixFormat format) {
  if (format == MatrixFormat::idx) throw ArgumentError("idx is a read-only format");
  auto out = open_out(path);
  if (format == MatrixFormat::csv) {
    std::string line;
    char buf[32];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      line.clear();
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (j) line.push_back(',');
        const int len = std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
        line.append(buf, static_cast<std::size_t>(len));
      }
      line.push_back('\n');
      out << line;
    }
  } else {
    std::vector<unsigned char> bytes(20 + static_cast<std::size_t>(m.size()) * 8);
    std::memcpy(bytes.data(), kMagic.data(), 4);
    store_le<std::uint64_t>(static_cast<std::uint64_t>(m.rows()), bytes.data() + 4);
    store_le<std::uint64_t>(static_cast<std::uint64_t>(m.cols()), bytes.data() + 12);
    unsigned char* q = bytes.data() + 20;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j, q += 8)
        store_le<std::uint64_t>(std::bit_cast<std::uint64_t>(m(i, j)), q);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  finish(out, path);
}

Labels load_idx_labels(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 8) throw FormatError("truncated idx label header", bytes.size());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (load_be32(p) != kIdxLabels) throw FormatError("idx magic is not 0x00000801", 0);
  const std::uint64_t count = load_be32(p + 4);
  if (8 + count != bytes.size()) throw FormatError("idx label payload size mismatch", 8);
  return Labels(p + 8, p + 8 + count);
}

std::string report_to_json(const RunReport& r) {
  const std::size_t len = r.energy_trace.size();
  if (len == 0) throw ValidationError("run report has empty traces");
  if (r.k_trace.size() != len || r.dims_trace.size() != len)
    throw ValidationError("run report traces have unequal lengths");
  nlohmann::ordered_json j;
  j["seed"] = r.seed;
  j["iterations"] = r.iterations;
  j["termination"] = to_string(r.termination);
  j["energy_trace"] = r.energy_trace;
  j["k_trace"] = r.k_trace;
  j["dims_trace"] = r.dims_trace;
  j["flags"] = r.flags;
  return j.dump(2) + "\n";
}

void emit_report(const RunReport& r, const std::filesystem::path& path) {
  write_text(path, report_to_json(r));
}

void save_labels(const Labels& labels, const std::filesystem::path& path) {
  std::string text;
  for (int l : labels) text += std::to_string(l) + "\n";
  write_text(path, text);
}

Labels load_labels(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  Labels out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    int v = 0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc()) throw FormatError("malformed label line " + std::to_string(out.size()), 0);
    out.push_back(v);
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& contents) {
  auto out = open_out(path);
  out << contents;
  finish(out, path);
}

}  // namespace gfam
