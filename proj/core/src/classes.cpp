#include "unlock/classes.hpp"

#include <algorithm>

namespace unlock {

ClassTable::ClassTable(std::vector<ClassDef> defs) : defs_(std::move(defs)) {
  std::sort(defs_.begin(), defs_.end(), [](const ClassDef& a, const ClassDef& b) { return a.id < b.id; });
  for (const ClassDef& d : defs_) {
    if (d.id < 0 || d.id > kMaxClassId) {
      throw ConfigError("class id " + std::to_string(d.id) + " outside [0, " +
                        std::to_string(kMaxClassId) + "]");
    }
  }
  for (std::size_t i = 1; i < defs_.size(); ++i) {
    if (defs_[i].id == defs_[i - 1].id) {
      throw ConfigError("duplicate class id " + std::to_string(defs_[i].id));
    }
  }
  max_id_ = defs_.empty() ? -1 : defs_.back().id;
  index_.assign(static_cast<std::size_t>(max_id_ + 1), -1);
  for (std::size_t i = 0; i < defs_.size(); ++i) {
    index_[static_cast<std::size_t>(defs_[i].id)] = static_cast<int>(i);
  }
}

bool ClassTable::contains(ClassId id) const {
  return id >= 0 && id <= max_id_ && index_[static_cast<std::size_t>(id)] >= 0;
}

const ClassDef& ClassTable::get(ClassId id) const {
  if (!contains(id)) {
    throw ConfigError("unknown class id " + std::to_string(id));
  }
  return defs_[static_cast<std::size_t>(index_[static_cast<std::size_t>(id)])];
}

std::vector<ClassId> ClassTable::thing_ids() const {
  std::vector<ClassId> ids;
  for (const ClassDef& d : defs_) {
    if (d.kind == ClassKind::Thing) ids.push_back(d.id);
  }
  return ids;
}

std::vector<ClassId> ClassTable::stuff_ids() const {
  std::vector<ClassId> ids;
  for (const ClassDef& d : defs_) {
    if (d.kind == ClassKind::Stuff) ids.push_back(d.id);
  }
  return ids;
}

}  // namespace unlock
