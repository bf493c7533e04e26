#include "popmap/census.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "popmap/errors.hpp"
#include "popmap/textio.hpp"

namespace popmap {

CensusTable CensusTable::from_records(std::vector<CensusRecord> recs) {
  CensusTable t;
  std::sort(recs.begin(), recs.end(),
            [](const CensusRecord& a, const CensusRecord& b) {
              return a.unit_id < b.unit_id;
            });
  for (const CensusRecord& r : recs) {
    if (r.population < 0.0)
      throw ValidationError("census: negative population for unit " +
                            std::to_string(r.unit_id));
    if (!t.by_id.emplace(r.unit_id, r.population).second)
      throw ValidationError("census: duplicate unit_id " + std::to_string(r.unit_id));
  }
  t.records = std::move(recs);
  return t;
}

double CensusTable::total() const {
  double s = 0.0;
  for (const CensusRecord& r : records) s += r.population;
  return s;
}

CensusTable read_census_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw ParseError(path.string(), 1, "empty file");
  ++lineno;
  if (chomp(line) != "unit_id,population")
    throw ParseError(path.string(), 1, "expected header 'unit_id,population'");
  std::vector<CensusRecord> recs;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = chomp(line);
    if (sv.empty()) continue;
    auto fields = split_csv(sv);
    long long id = 0;
    double pop = 0.0;
    if (fields.size() != 2 || !parse_i64(fields[0], id) ||
        !parse_double(fields[1], pop))
      throw ParseError(path.string(), lineno, "malformed census row '" +
                                                  std::string(sv) + "'");
    if (pop < 0.0)
      throw ParseError(path.string(), lineno, "negative population");
    recs.push_back({static_cast<std::int32_t>(id), pop});
  }
  try {
    return CensusTable::from_records(std::move(recs));
  } catch (const ValidationError& e) {
    throw ParseError(path.string(), lineno, e.what());
  }
}

void write_census_csv(const CensusTable& t, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "unit_id,population\n";
  for (const CensusRecord& r : t.records)
    out << r.unit_id << ',' << fmt_double(r.population) << '\n';
  write_text_file(path, out.str());
}

std::vector<std::pair<std::int32_t, std::int32_t>> read_nesting_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw ParseError(path.string(), 1, "empty file");
  ++lineno;
  if (chomp(line) != "fine_id,coarse_id")
    throw ParseError(path.string(), 1, "expected header 'fine_id,coarse_id'");
  std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = chomp(line);
    if (sv.empty()) continue;
    auto fields = split_csv(sv);
    long long f = 0, c = 0;
    if (fields.size() != 2 || !parse_i64(fields[0], f) || !parse_i64(fields[1], c))
      throw ParseError(path.string(), lineno, "malformed nesting row");
    pairs.emplace_back(static_cast<std::int32_t>(f), static_cast<std::int32_t>(c));
  }
  return pairs;
}

void write_nesting_csv(
    const std::vector<std::pair<std::int32_t, std::int32_t>>& pairs,
    const std::filesystem::path& path) {
  std::ostringstream out;
  out << "fine_id,coarse_id\n";
  for (const auto& [f, c] : pairs) out << f << ',' << c << '\n';
  write_text_file(path, out.str());
}

std::vector<std::int32_t> missing_census_units(const RasterI32& admin,
                                               const CensusTable& census) {
  std::set<std::int32_t> missing;
  for (const std::int32_t id : admin.values)
    if (id != admin.nodata && !census.contains(id)) missing.insert(id);
  return {missing.begin(), missing.end()};
}

}  // namespace popmap
