#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace plab {

enum class TaskKind {
  LinearRegression,
  QuadraticRegression,
  SparseLinearRegression,
  LeakyReLURegression,
  SparseParity,
  Parity,
  GaussianRetrieval,
  BooleanRetrieval,
};

enum class Modality { Continuous, Boolean };

// Declarative description of one in-context-learning task.
struct TaskSpec {
  TaskKind kind = TaskKind::LinearRegression;
  int dim = 10;
  double mu = 0.0;       // mean shift, continuous tasks only
  int sparsity = 3;      // retained coords (sparse linear) or subset arity (sparse parity)
  double slope = 0.5;    // leaky-relu negative slope

  Modality modality() const;
  bool is_retrieval() const {
    return kind == TaskKind::GaussianRetrieval || kind == TaskKind::BooleanRetrieval;
  }
  // Short name used in CLIs, configs, and logs (e.g. "lr", "sp2", "bret").
  std::string name() const;
  void validate() const;

  bool operator==(const TaskSpec&) const = default;
};

TaskSpec make_task(TaskKind kind, int dim, double mu = 0.0, int sparsity = 3,
                   double slope = 0.5);
// Parses names like "lr", "qr", "slr", "lrelu", "sp2", "sp3", "parity",
// "gret", "bret"; throws std::invalid_argument on unknown names.
TaskKind task_kind_from_name(const std::string& name, int* sparsity = nullptr);
std::string to_string(TaskKind kind);

// 1024 key/value tuples backing a retrieval task. Keys are pairwise distinct.
struct RetrievalTable {
  static constexpr int kRows = 1024;
  static constexpr int kValuesPerKey = 4;
  TaskSpec task;
  std::vector<double> keys;    // kRows * d, row-major
  std::vector<double> values;  // kRows * kValuesPerKey

  const double* key(int i) const { return keys.data() + static_cast<size_t>(i) * task.dim; }
  double value(int i, int j) const { return values[static_cast<size_t>(i) * kValuesPerKey + j]; }
};

// One sampled in-context function f ~ D_F.
struct FunctionSample {
  struct Linear {                // linear & leaky-relu regression
    std::vector<double> w;
  };
  struct Quadratic {             // f(x) = x^T W x, W row-major d x d
    std::vector<double> W;
  };
  struct SparseLinear {          // w restricted to idx, zero elsewhere
    std::vector<double> w;
    std::vector<int> idx;
  };
  struct ParitySubset {          // f(x) = prod_{i in idx} x[i]
    std::vector<int> idx;
  };
  struct Retrieval {             // one generated retrieval prompt
    std::shared_ptr<const RetrievalTable> table;
    std::vector<int> rows;          // n-1 distinct table rows
    std::vector<int> value_choice;  // chosen value column per row
    int query_index = 0;            // p in {0,..,n-2}
  };

  TaskSpec task;
  std::variant<Linear, Quadratic, SparseLinear, ParitySubset, Retrieval> payload;
};

// One 2n-token demonstration sequence (x_1, y_1, ..., x_n, y_n).
struct PromptSequence {
  int task_id = 0;             // index into the run's task list
  int n = 0;
  int dim = 0;
  std::vector<double> xs;      // n * dim, row-major
  std::vector<double> ys;      // n
  FunctionSample fn;

  const double* x(int i) const { return xs.data() + static_cast<size_t>(i) * dim; }
};

// Ordered task mixture; weights sum to 1 and B*weight must be integral.
struct MixtureSpec {
  struct Entry {
    TaskSpec task;
    double weight = 1.0;
  };
  std::vector<Entry> entries;

  static MixtureSpec even(const std::vector<TaskSpec>& tasks);
  void validate() const;
  // Per-task counts for batch size B; throws std::invalid_argument naming the
  // offending entry when B*weight is not integral.
  std::vector<int> counts(int batch_size) const;
};

}  // namespace plab
