#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "anonsim/adversary.hpp"
#include "anonsim/graph.hpp"
#include "anonsim/metrics.hpp"
#include "anonsim/spreading.hpp"
#include "anonsim/theory.hpp"

namespace anonsim {

/// Raised for malformed input files; the message names the offending line or column.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void write_graph(std::ostream& out, const NetworkGraph& g);
NetworkGraph read_graph(std::istream& in);

void write_log_csv(std::ostream& out, const ObservationLog& log);
/// first_spy is rebuilt as the earliest row per tx.
ObservationLog read_log_csv(std::istream& in, ProtocolTag protocol);

void write_posterior_csv(std::ostream& out, const PosteriorModel& model);
PosteriorModel read_posterior_csv(std::istream& in, std::vector<NodeId> nodes,
                                  std::vector<TxId> txs);

void write_points_csv(std::ostream& out, const std::vector<DetectionPoint>& points);
std::vector<DetectionPoint> read_points_csv(std::istream& in);

struct BoundRow {
    std::string name;
    std::string direction;
    double p = 0.0;
    std::size_t n = 0;
    std::size_t d = 0;
    double value = 0.0;
};

std::vector<BoundRow> bound_rows(const BoundTable& table);
void write_bounds_csv(std::ostream& out, const std::vector<BoundRow>& rows);
std::vector<BoundRow> read_bounds_csv(std::istream& in);

/// Round-trippable decimal text for a double.
std::string format_double(double v);

/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Splits a header line and checks it against the expected columns.
void expect_header(const std::string& line, const std::vector<std::string>& columns);

}  // namespace anonsim
