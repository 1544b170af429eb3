// ============================================================================
// levta/model.hpp — line-oriented model file: system, partition functions,
// options
// ============================================================================

#ifndef LEVTA_MODEL_HPP
#define LEVTA_MODEL_HPP

#include "levta/dynsys.hpp"
#include "levta/partition.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace levta {

/// Model-file parse or validation error, annotated with a 1-based line.
class ModelError : public std::runtime_error {
public:
    ModelError(const std::string& msg, int line);
    int line() const { return line_; }

private:
    int line_;
};

struct ModelOptions {
    int grid = 201;
    double rk4_step = 1e-3;
    double t_max = 50.0;
    std::uint64_t seed = 42;
    double tol_complete = 1e-4;
    int samples_per_level = 200;
    int extra_level_pairs = 5;
};

struct PartitionBlock {
    std::string name;
    Expr phi;
    std::vector<double> levels;
};

struct ModelFile {
    DynSystem system;
    std::vector<PartitionBlock> partitions;
    ModelOptions options;

    std::vector<PartitionFunction> make_partition_functions() const;
};

/// Parse and fully validate a model from text. origin names the source in
/// error messages.
ModelFile parse_model(const std::string& text, const std::string& origin = "<string>");

ModelFile load_model(const std::string& path);

/// Canonical text form; parse_model(print_model(m)) is semantically
/// identical to m.
std::string print_model(const ModelFile& m);

/// Shortest decimal string that parses back to exactly v (inf/-inf spelled
/// out).
std::string double_to_string(double v);

}  // namespace levta

#endif  // LEVTA_MODEL_HPP
