#include "facespace/dataset.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "facespace/error.hpp"
#include "facespace/kvconfig.hpp"

namespace facespace {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::ranges::transform(out, out.begin(),
                         [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void validate_meta(const ImageMeta& m) {
  if (m.image_id.empty()) throw Error(ErrorCode::InvalidMetadata, "empty image_id");
  if (m.image_id.find_first_of(",\"\r\n") != std::string::npos) {
    throw Error(ErrorCode::InvalidMetadata,
                "image_id '" + m.image_id + "' contains a CSV delimiter or quote");
  }
  if (m.strength_pct <= 0) {
    throw Error(ErrorCode::InvalidMetadata,
                m.image_id + ": strength_pct must be positive, got " +
                    std::to_string(m.strength_pct));
  }
  if (!std::isfinite(m.yaw_deg)) {
    throw Error(ErrorCode::InvalidMetadata, m.image_id + ": yaw_deg is not finite");
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <typename T>
T parse_number(const std::string& text, const std::string& what, const std::filesystem::path& path,
               std::size_t line_no) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::InvalidMetadata, path.string() + ":" + std::to_string(line_no) +
                                                ": bad " + what + " '" + text + "'");
  }
  return value;
}

void put_u64_le(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> bytes{};
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

std::uint64_t get_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

std::string_view to_string(Gender g) noexcept { return g == Gender::Male ? "male" : "female"; }

std::string_view to_string(Illumination i) noexcept {
  return i == Illumination::Ambient ? "ambient" : "spotlight";
}

Gender parse_gender(std::string_view s) {
  const auto l = lower(s);
  if (l == "male") return Gender::Male;
  if (l == "female") return Gender::Female;
  throw Error(ErrorCode::InvalidMetadata, "unrecognized gender '" + std::string(s) + "'");
}

Illumination parse_illumination(std::string_view s) {
  const auto l = lower(s);
  if (l == "ambient") return Illumination::Ambient;
  if (l == "spotlight") return Illumination::Spotlight;
  throw Error(ErrorCode::InvalidMetadata, "unrecognized illumination '" + std::string(s) + "'");
}

FaceDataset::FaceDataset(std::size_t dim) : dim_(dim), embeddings_(0, static_cast<Eigen::Index>(dim)) {
  if (dim == 0) throw Error(ErrorCode::ShapeMismatch, "dataset dim must be positive");
}

FaceDataset::FaceDataset(std::vector<ImageMeta> meta, RowMatrix embeddings)
    : dim_(static_cast<std::size_t>(embeddings.cols())),
      meta_(std::move(meta)),
      embeddings_(std::move(embeddings)) {
  if (dim_ == 0) throw Error(ErrorCode::ShapeMismatch, "dataset dim must be positive");
  if (static_cast<std::size_t>(embeddings_.rows()) != meta_.size()) {
    throw Error(ErrorCode::CountMismatch, std::to_string(meta_.size()) + " metadata rows but " +
                                              std::to_string(embeddings_.rows()) +
                                              " embedding rows");
  }
  std::unordered_set<std::string_view> seen;
  seen.reserve(meta_.size());
  for (const auto& m : meta_) {
    validate_meta(m);
    if (!seen.insert(m.image_id).second) {
      throw Error(ErrorCode::InvalidMetadata, "duplicate image_id '" + m.image_id + "'");
    }
  }
  if (!embeddings_.allFinite()) {
    for (Eigen::Index r = 0; r < embeddings_.rows(); ++r) {
      if (!embeddings_.row(r).allFinite()) {
        throw Error(ErrorCode::NonFinite,
                    "embedding for '" + meta_[static_cast<std::size_t>(r)].image_id +
                        "' has non-finite values");
      }
    }
  }
}

bool operator==(const FaceDataset& a, const FaceDataset& b) {
  if (a.dim_ != b.dim_ || a.meta_ != b.meta_) return false;
  const auto count = static_cast<std::size_t>(a.embeddings_.size());
  return count == static_cast<std::size_t>(b.embeddings_.size()) &&
         (count == 0 || std::memcmp(a.embeddings_.data(), b.embeddings_.data(),
                                    count * sizeof(double)) == 0);
}

FaceDataset normalize_rows(const FaceDataset& dataset) {
  RowMatrix out = dataset.embeddings();
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double norm = out.row(r).norm();
    if (norm == 0.0) {
      throw Error(ErrorCode::ZeroVector, "embedding for '" +
                                             dataset.meta(static_cast<std::size_t>(r)).image_id +
                                             "' has zero norm");
    }
    out.row(r) /= norm;
  }
  return FaceDataset(dataset.meta(), std::move(out));
}

bool is_unit_normalized(const FaceDataset& dataset, double tolerance) {
  const auto& e = dataset.embeddings();
  for (Eigen::Index r = 0; r < e.rows(); ++r) {
    if (std::abs(e.row(r).norm() - 1.0) > tolerance) return false;
  }
  return true;
}

FaceDataset select_rows(const FaceDataset& dataset, std::span<const std::size_t> rows) {
  std::vector<ImageMeta> meta;
  meta.reserve(rows.size());
  RowMatrix emb(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dataset.dim()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    meta.push_back(dataset.meta(rows[k]));
    emb.row(static_cast<Eigen::Index>(k)) = dataset.row(rows[k]);
  }
  return FaceDataset(std::move(meta), std::move(emb));
}

FaceDataset filter(const FaceDataset& dataset, const MetaPredicate& keep) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (keep(dataset.meta(i))) rows.push_back(i);
  }
  return select_rows(dataset, rows);
}

std::vector<int> strength_levels(const FaceDataset& dataset) {
  std::set<int> levels;
  for (const auto& m : dataset.meta()) levels.insert(m.strength_pct);
  return {levels.begin(), levels.end()};
}

std::vector<std::uint64_t> identity_ids(const FaceDataset& dataset) {
  std::set<std::uint64_t> ids;
  for (const auto& m : dataset.meta()) ids.insert(m.identity_id);
  return {ids.begin(), ids.end()};
}

std::vector<ImageMeta> read_metadata_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::SchemaError, path.string() + ": missing header");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMetaHeader) {
    throw Error(ErrorCode::SchemaError, path.string() + ": header must be '" +
                                            std::string(kMetaHeader) + "', got '" + line + "'");
  }
  std::vector<ImageMeta> meta;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 6) {
      throw Error(ErrorCode::SchemaError, path.string() + ":" + std::to_string(line_no) +
                                              ": expected 6 columns, got " +
                                              std::to_string(fields.size()));
    }
    ImageMeta m;
    m.image_id = fields[0];
    m.identity_id = parse_number<std::uint64_t>(fields[1], "identity_id", path, line_no);
    m.gender = parse_gender(fields[2]);
    m.illumination = parse_illumination(fields[3]);
    m.yaw_deg = parse_number<double>(fields[4], "yaw_deg", path, line_no);
    m.strength_pct = parse_number<int>(fields[5], "strength_pct", path, line_no);
    validate_meta(m);
    meta.push_back(std::move(m));
  }
  return meta;
}

void write_metadata_csv(std::span<const ImageMeta> meta, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << kMetaHeader << '\n';
  for (const auto& m : meta) {
    out << m.image_id << ',' << m.identity_id << ',' << to_string(m.gender) << ','
        << to_string(m.illumination) << ',' << format_double(m.yaw_deg) << ',' << m.strength_pct
        << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

RowMatrix read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::array<unsigned char, 20> header{};
  in.read(reinterpret_cast<char*>(header.data()), header.size());
  const auto got = static_cast<std::size_t>(in.gcount());
  if (got >= 4 && std::memcmp(header.data(), kEmbeddingMagic.data(), 4) != 0) {
    throw Error(ErrorCode::MagicMismatch, path.string() + ": not an FSE1 embedding file");
  }
  if (got < header.size()) {
    throw Error(ErrorCode::TruncatedFile, path.string() + ": header shorter than 20 bytes");
  }
  const std::uint64_t n = get_u64_le(header.data() + 4);
  const std::uint64_t d = get_u64_le(header.data() + 12);
  if (d == 0) throw Error(ErrorCode::SchemaError, path.string() + ": dim is zero");

  const auto payload_bytes = std::filesystem::file_size(path) - header.size();
  if (n != 0 && (d > payload_bytes / 4 || n > payload_bytes / (4 * d))) {
    throw Error(ErrorCode::TruncatedFile, path.string() + ": header declares " +
                                              std::to_string(n) + "x" + std::to_string(d) +
                                              " floats, file holds " +
                                              std::to_string(payload_bytes / 4));
  }
  if (payload_bytes != n * d * 4) {
    throw Error(ErrorCode::SchemaError, path.string() + ": trailing bytes after payload");
  }

  RowMatrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::vector<unsigned char> buf(static_cast<std::size_t>(d) * 4);
  for (std::uint64_t r = 0; r < n; ++r) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
      throw Error(ErrorCode::TruncatedFile, path.string() + ": short read at row " +
                                                std::to_string(r));
    }
    for (std::uint64_t c = 0; c < d; ++c) {
      const unsigned char* p = buf.data() + 4 * c;
      const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                                 (static_cast<std::uint32_t>(p[1]) << 8) |
                                 (static_cast<std::uint32_t>(p[2]) << 16) |
                                 (static_cast<std::uint32_t>(p[3]) << 24);
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          static_cast<double>(std::bit_cast<float>(bits));
    }
  }
  return out;
}

void write_embeddings(const RowMatrix& embeddings, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(kEmbeddingMagic.data(), 4);
  put_u64_le(out, static_cast<std::uint64_t>(embeddings.rows()));
  put_u64_le(out, static_cast<std::uint64_t>(embeddings.cols()));
  std::vector<char> buf(static_cast<std::size_t>(embeddings.cols()) * 4);
  for (Eigen::Index r = 0; r < embeddings.rows(); ++r) {
    for (Eigen::Index c = 0; c < embeddings.cols(); ++c) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(embeddings(r, c)));
      char* p = buf.data() + 4 * c;
      for (int b = 0; b < 4; ++b) p[b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

FaceDataset load_dataset(const std::filesystem::path& meta_path,
                         const std::filesystem::path& emb_path) {
  auto meta = read_metadata_csv(meta_path);
  auto emb = read_embeddings(emb_path);
  if (static_cast<std::size_t>(emb.rows()) != meta.size()) {
    throw Error(ErrorCode::CountMismatch,
                meta_path.string() + " has " + std::to_string(meta.size()) + " rows but " +
                    emb_path.string() + " has " + std::to_string(emb.rows()));
  }
  if (meta.empty()) return FaceDataset(static_cast<std::size_t>(emb.cols()));
  return FaceDataset(std::move(meta), std::move(emb));
}

void write_dataset(const FaceDataset& dataset, const std::filesystem::path& meta_path,
                   const std::filesystem::path& emb_path) {
  write_metadata_csv(dataset.meta(), meta_path);
  write_embeddings(dataset.embeddings(), emb_path);
}

}  // namespace facespace
