#include "attackability/table.hpp"

#include <sstream>

#include "attackability/errors.hpp"
#include "attackability/io.hpp"

namespace attackability {

void PerturbationTable::add(PerturbationRecord rec) {
  Key key{rec.sample_id, rec.model_id, rec.method};
  auto [it, inserted] = index_.emplace(std::move(key), rows_.size());
  if (!inserted)
    throw DomainError("duplicate table entry for (" + rec.sample_id + ", " +
                      rec.model_id + ", " + to_string(rec.method) + ")");
  rows_.push_back(std::move(rec));
}

const PerturbationRecord* PerturbationTable::find(const std::string& sample_id,
                                                  const std::string& model_id,
                                                  AttackMethod method) const {
  auto it = index_.find(Key{sample_id, model_id, method});
  return it == index_.end() ? nullptr : &rows_[it->second];
}

double PerturbationTable::min_epsilon(const std::string& sample_id,
                                      const std::string& model_id,
                                      AttackMethod method) const {
  const auto* rec = find(sample_id, model_id, method);
  if (!rec)
    throw IncompleteTableError("no entry for (" + sample_id + ", " + model_id + ", " +
                               to_string(method) + ")");
  return rec->min_epsilon;
}

std::vector<double> PerturbationTable::column(std::span<const std::string> sample_ids,
                                              const std::string& model_id,
                                              AttackMethod method) const {
  std::vector<double> out;
  out.reserve(sample_ids.size());
  std::string missing;
  std::size_t missing_count = 0;
  for (const auto& sid : sample_ids) {
    const auto* rec = find(sid, model_id, method);
    if (!rec) {
      ++missing_count;
      if (missing_count <= 8) missing += " (" + sid + ", " + model_id + ")";
      continue;
    }
    out.push_back(rec->min_epsilon);
  }
  if (missing_count > 0)
    throw IncompleteTableError("perturbation table is missing " +
                               std::to_string(missing_count) + " pairs for method " +
                               to_string(method) + ":" + missing +
                               (missing_count > 8 ? " ..." : ""));
  return out;
}

void PerturbationTable::save_csv(const std::filesystem::path& path,
                                 const std::string& config_hash) const {
  std::ostringstream out;
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << "\n";
  out << "sample_id,model_id,attack_method,delta_inf_norm,success_epsilon_or_inf\n";
  for (const auto& r : rows_) {
    out << r.sample_id << "," << r.model_id << "," << to_string(r.method) << ","
        << format_double(r.delta_inf_norm) << "," << format_double(r.min_epsilon) << "\n";
  }
  write_text_file(path, out.str());
}

PerturbationTable PerturbationTable::load_csv(const std::filesystem::path& path,
                                              std::string* config_hash_out) {
  auto rows = read_csv(path, config_hash_out);
  if (rows.empty()) throw FormatError(path.string() + ": empty table");
  PerturbationTable table;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != 5)
      throw FormatError(path.string() + ": row " + std::to_string(r) +
                        " has " + std::to_string(row.size()) + " fields, expected 5");
    PerturbationRecord rec;
    rec.sample_id = row[0];
    rec.model_id = row[1];
    rec.method = attack_method_from_string(row[2]);
    rec.delta_inf_norm = parse_double(row[3]);
    rec.min_epsilon = parse_double(row[4]);
    table.add(std::move(rec));
  }
  return table;
}

}  // namespace attackability
