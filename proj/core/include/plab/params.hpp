#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace plab {

struct ParamEntry {
  std::string name;
  std::vector<int> shape;
  size_t offset = 0;
  size_t size = 0;
  double lr_scale = 1.0;  // per-group learning-rate multiplier
};

// Flat, named parameter collection. Entry order is fixed at construction and
// defines the checkpoint layout and the Adam moment layout.
template <class S>
struct ParamStore {
  std::vector<ParamEntry> entries;
  std::vector<S> values;

  int add(const std::string& name, std::vector<int> shape, double lr_scale = 1.0) {
    ParamEntry e;
    e.name = name;
    e.shape = std::move(shape);
    e.size = 1;
    for (int s : e.shape) e.size *= static_cast<size_t>(s);
    e.offset = values.size();
    e.lr_scale = lr_scale;
    values.resize(values.size() + e.size, S(0));
    entries.push_back(std::move(e));
    return static_cast<int>(entries.size()) - 1;
  }

  S* data(int idx) { return values.data() + entries[idx].offset; }
  const S* data(int idx) const { return values.data() + entries[idx].offset; }

  const ParamEntry& find(const std::string& name) const {
    for (const auto& e : entries)
      if (e.name == name) return e;
    throw std::invalid_argument("no parameter named " + name);
  }

  size_t size() const { return values.size(); }

  template <class T>
  ParamStore<T> cast() const {
    ParamStore<T> out;
    out.entries = entries;
    out.values.resize(values.size());
    for (size_t i = 0; i < values.size(); ++i)
      out.values[i] = static_cast<T>(values[i]);
    return out;
  }
};

}  // namespace plab
