#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unlock/errors.hpp"

namespace unlock {

// Class ids are small non-negative integers. Two values are reserved in u8
// label grids: 254 marks an uncertain pixel in generated semantic maps and
// 255 marks an ignored pixel in ground truth.
using ClassId = int;

inline constexpr std::uint8_t kUncertainLabel = 254;
inline constexpr std::uint8_t kIgnoreLabel = 255;
inline constexpr ClassId kMaxClassId = 253;

enum class ClassKind { Stuff, Thing };

struct ClassDef {
  ClassId id = 0;
  std::string name;
  ClassKind kind = ClassKind::Stuff;
};

// Immutable id -> definition table shared by every stage. Ids need not be
// dense but must be unique and within [0, kMaxClassId].
class ClassTable {
 public:
  ClassTable() = default;
  explicit ClassTable(std::vector<ClassDef> defs);

  const std::vector<ClassDef>& defs() const { return defs_; }
  std::size_t size() const { return defs_.size(); }

  bool contains(ClassId id) const;
  const ClassDef& get(ClassId id) const;
  bool is_thing(ClassId id) const { return get(id).kind == ClassKind::Thing; }
  bool is_stuff(ClassId id) const { return get(id).kind == ClassKind::Stuff; }

  std::vector<ClassId> thing_ids() const;
  std::vector<ClassId> stuff_ids() const;
  ClassId max_id() const { return max_id_; }

 private:
  std::vector<ClassDef> defs_;       // sorted by id
  std::vector<int> index_;           // id -> position in defs_, -1 if absent
  ClassId max_id_ = -1;
};

}  // namespace unlock
