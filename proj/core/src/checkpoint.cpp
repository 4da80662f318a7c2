#include "tkge/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

namespace tkge {

namespace {

constexpr std::string_view kMagic = "tkge-ckpt";
constexpr std::string_view kVersion = "v1";

void write_value(std::string& buf, double x) {
  char tmp[40];
  auto [ptr, ec] = std::to_chars(tmp, tmp + sizeof(tmp), x, std::chars_format::scientific, 16);
  buf.append(tmp, ptr);
}

void write_table(std::ofstream& out, const EmbeddingStore& store, ParamTable table) {
  std::string buf;
  for (int id = 0; id < store.rows(table); ++id) {
    buf.clear();
    auto row = store.row(table, id);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) buf.push_back(' ');
      write_value(buf, row[i]);
    }
    buf.push_back('\n');
    out << buf;
  }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const EmbeddingStore& store, Norm norm,
                     const BucketIndex& index) {
  if (uses_bucket_planes(store.kind()) && store.num_buckets() != index.num_buckets())
    throw error("checkpoint: store and bucket index disagree on bucket count");
  std::ofstream out(path);
  if (!out) throw io_error("cannot write checkpoint " + path.string());

  out << kMagic << ' ' << kVersion << ' ' << to_string(store.kind()) << ' ' << store.dim() << ' '
      << store.num_entities() << ' ' << store.num_relations() << ' ' << index.num_buckets() << ' '
      << to_string(norm) << '\n';
  out << index.min_year() << ' ' << index.max_year();
  for (Year b : index.boundaries()) out << ' ' << b;
  out << '\n';

  write_table(out, store, ParamTable::entity);
  write_table(out, store, ParamTable::relation);
  write_table(out, store, ParamTable::normal);
  write_table(out, store, ParamTable::relation_normal);
  if (!out) throw io_error("write failure on checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open checkpoint " + path.string());

  std::string magic, version, kind_name, norm_name;
  int dim = 0, num_entities = 0, num_relations = 0, num_buckets = 0;
  std::string header;
  if (!std::getline(in, header)) throw malformed_line_error("empty checkpoint " + path.string());
  {
    std::istringstream hs(header);
    hs >> magic >> version >> kind_name >> dim >> num_entities >> num_relations >> num_buckets >>
        norm_name;
    if (!hs || magic != kMagic || version != kVersion)
      throw malformed_line_error("bad checkpoint header in " + path.string());
  }
  ModelKind kind = parse_model_kind(kind_name);
  Norm norm = parse_norm(norm_name);
  if (dim < 1 || num_entities < 1 || num_relations < 1 || num_buckets < 1)
    throw malformed_line_error("nonpositive sizes in checkpoint header of " + path.string());

  std::string boundary_line;
  if (!std::getline(in, boundary_line))
    throw malformed_line_error("checkpoint " + path.string() + " missing boundary line");
  Year min_year = 0, max_year = 0;
  std::vector<Year> boundaries;
  {
    std::istringstream bs(boundary_line);
    if (!(bs >> min_year >> max_year))
      throw malformed_line_error("bad boundary line in " + path.string());
    Year b = 0;
    while (bs >> b) boundaries.push_back(b);
    if (static_cast<int>(boundaries.size()) + 1 != num_buckets)
      throw malformed_line_error("boundary count disagrees with header in " + path.string());
  }

  Checkpoint ckpt{EmbeddingStore(kind, num_entities, num_relations, num_buckets, dim), norm,
                  BucketIndex(std::move(boundaries), min_year, max_year)};
  for (ParamTable table : {ParamTable::entity, ParamTable::relation, ParamTable::normal,
                           ParamTable::relation_normal}) {
    for (int id = 0; id < ckpt.store.rows(table); ++id) {
      auto row = ckpt.store.row(table, id);
      for (double& x : row)
        if (!(in >> x))
          throw malformed_line_error("truncated parameter section in " + path.string());
    }
  }
  double extra = 0.0;
  if (in >> extra) throw malformed_line_error("trailing data in checkpoint " + path.string());
  if (!ckpt.store.all_finite())
    throw malformed_line_error("non-finite parameter in checkpoint " + path.string());
  return ckpt;
}

}  // namespace tkge
