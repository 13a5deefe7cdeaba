#include "plab/task.hpp"

#include <cmath>

namespace plab {

Modality TaskSpec::modality() const {
  switch (kind) {
    case TaskKind::SparseParity:
    case TaskKind::Parity:
    case TaskKind::BooleanRetrieval:
      return Modality::Boolean;
    default:
      return Modality::Continuous;
  }
}

std::string TaskSpec::name() const {
  switch (kind) {
    case TaskKind::LinearRegression: return "lr";
    case TaskKind::QuadraticRegression: return "qr";
    case TaskKind::SparseLinearRegression: return "slr";
    case TaskKind::LeakyReLURegression: return "lrelu";
    case TaskKind::SparseParity: return "sp" + std::to_string(sparsity);
    case TaskKind::Parity: return "parity";
    case TaskKind::GaussianRetrieval: return "gret";
    case TaskKind::BooleanRetrieval: return "bret";
  }
  return "?";
}

void TaskSpec::validate() const {
  if (dim < 1) throw std::invalid_argument("task dim must be >= 1");
  if (kind == TaskKind::SparseParity || kind == TaskKind::SparseLinearRegression) {
    if (sparsity < 1 || sparsity > dim)
      throw std::invalid_argument("sparsity must satisfy 1 <= k <= dim");
  }
  if (kind == TaskKind::LeakyReLURegression) {
    if (!(slope > 0.0 && slope < 1.0))
      throw std::invalid_argument("leaky-relu slope must be in (0,1)");
  }
  if (kind == TaskKind::BooleanRetrieval) {
    // 2^d distinct keys must cover the 1024-row table.
    if (dim < 10)
      throw std::invalid_argument("boolean retrieval requires dim >= 10");
  }
}

TaskSpec make_task(TaskKind kind, int dim, double mu, int sparsity, double slope) {
  TaskSpec s{kind, dim, mu, sparsity, slope};
  s.validate();
  return s;
}

TaskKind task_kind_from_name(const std::string& name, int* sparsity) {
  if (name == "lr") return TaskKind::LinearRegression;
  if (name == "qr") return TaskKind::QuadraticRegression;
  if (name == "slr") return TaskKind::SparseLinearRegression;
  if (name == "lrelu") return TaskKind::LeakyReLURegression;
  if (name == "parity") return TaskKind::Parity;
  if (name == "gret") return TaskKind::GaussianRetrieval;
  if (name == "bret") return TaskKind::BooleanRetrieval;
  if (name.size() > 2 && name.compare(0, 2, "sp") == 0) {
    int k = std::stoi(name.substr(2));
    if (sparsity) *sparsity = k;
    return TaskKind::SparseParity;
  }
  throw std::invalid_argument("unknown task name: " + name);
}

std::string to_string(TaskKind kind) {
  TaskSpec s;
  s.kind = kind;
  s.sparsity = 0;
  std::string n = s.name();
  return kind == TaskKind::SparseParity ? "sp" : n;
}

MixtureSpec MixtureSpec::even(const std::vector<TaskSpec>& tasks) {
  MixtureSpec mix;
  for (const auto& t : tasks)
    mix.entries.push_back({t, 1.0 / static_cast<double>(tasks.size())});
  return mix;
}

void MixtureSpec::validate() const {
  if (entries.empty()) throw std::invalid_argument("mixture has no entries");
  double total = 0;
  for (const auto& e : entries) {
    e.task.validate();
    if (!(e.weight > 0.0 && e.weight <= 1.0))
      throw std::invalid_argument("mixture weight must be in (0,1]");
    total += e.weight;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("mixture weights must sum to 1");
}

std::vector<int> MixtureSpec::counts(int batch_size) const {
  validate();
  std::vector<int> out;
  for (const auto& e : entries) {
    double exact = e.weight * batch_size;
    int c = static_cast<int>(std::lround(exact));
    if (c < 1 || std::abs(exact - c) > 1e-9)
      throw std::invalid_argument("B*weight is not a positive integer for task " +
                                  e.task.name());
    out.push_back(c);
  }
  return out;
}

}  // namespace plab
