#include "anonsim/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace anonsim {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

template <typename T>
T parse_number(const std::string& text, const std::string& column) {
    T value{};
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw FormatError("column '" + column + "': cannot parse '" + text + "'");
    return value;
}

bool next_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) return true;
    }
    return false;
}

std::vector<std::string> row_fields(const std::string& line, std::size_t expected) {
    auto fields = split_csv(line);
    if (fields.size() != expected)
        throw FormatError("expected " + std::to_string(expected) + " fields in row '" + line + "'");
    return fields;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void expect_header(const std::string& line, const std::vector<std::string>& columns) {
    const auto fields = split_csv(line);
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i >= fields.size()) throw FormatError("missing column '" + columns[i] + "'");
        if (fields[i] != columns[i])
            throw FormatError("expected column '" + columns[i] + "' but found '" + fields[i] + "'");
    }
    if (fields.size() > columns.size())
        throw FormatError("unexpected column '" + fields[columns.size()] + "'");
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Graphs

void write_graph(std::ostream& out, const NetworkGraph& g) {
    out << "# topology " << g.spec().name() << " seed " << g.seed() << '\n';
    out << "n " << g.size() << '\n';
    out << "roles ";
    for (NodeId v = 0; v < g.size(); ++v) out << (g.is_spy(v) ? '1' : '0');
    out << '\n';
    for (const auto& [a, b] : g.edges()) out << a << ' ' << b << '\n';
}

NetworkGraph read_graph(std::istream& in) {
    std::string line;
    TopologySpec spec;
    std::string tag;
    std::uint64_t seed = 0;
    std::size_t n = 0;
    bool have_n = false;
    std::vector<Role> roles;
    std::vector<std::pair<NodeId, NodeId>> edges;
    while (next_line(in, line)) {
        std::istringstream fields(line);
        if (line.rfind("# topology ", 0) == 0) {
            std::string hash, word, seed_word;
            fields >> hash >> word >> tag >> seed_word >> seed;
            continue;
        }
        if (line[0] == '#') continue;
        if (line.rfind("n ", 0) == 0) {
            std::string word;
            fields >> word >> n;
            have_n = true;
            continue;
        }
        if (line.rfind("roles", 0) == 0) {
            std::string word, bits;
            fields >> word >> bits;
            for (char c : bits) {
                if (c != '0' && c != '1') throw FormatError("roles must be a 0/1 string");
                roles.push_back(c == '1' ? Role::Adversarial : Role::Honest);
            }
            continue;
        }
        NodeId a = 0, b = 0;
        if (!(fields >> a >> b)) throw FormatError("malformed edge line '" + line + "'");
        edges.emplace_back(a, b);
    }
    if (!have_n) throw FormatError("graph file lacks an 'n' line");
    if (roles.empty()) roles.assign(n, Role::Honest);
    if (roles.size() != n) throw FormatError("roles string length differs from n");
    spec = tag.empty() ? TopologySpec{TopologyKind::Complete, n, 0} : parse_topology(tag, n);
    NetworkGraph g(spec, seed, std::move(edges));
    g.set_roles(std::move(roles));
    return g;
}

// ---------------------------------------------------------------------------
// Observation logs

void write_log_csv(std::ostream& out, const ObservationLog& log) {
    out << "tx,spy,sender,time,virtual\n";
    for (const ObservationTuple& t : log.full) {
        out << log.txs[t.tx].nonce << ',';
        if (t.virtual_exit)
            out << -1;
        else
            out << t.spy;
        out << ',' << t.sender << ',' << format_double(t.time) << ',' << (t.virtual_exit ? 1 : 0)
            << '\n';
    }
}

ObservationLog read_log_csv(std::istream& in, ProtocolTag protocol) {
    std::string line;
    if (!next_line(in, line)) throw FormatError("empty log file");
    expect_header(line, {"tx", "spy", "sender", "time", "virtual"});
    ObservationLog log;
    log.protocol = protocol;
    std::map<std::uint64_t, std::uint32_t> index;
    while (next_line(in, line)) {
        const auto f = row_fields(line, 5);
        const auto nonce = parse_number<std::uint64_t>(f[0], "tx");
        const auto [it, inserted] = index.emplace(nonce, static_cast<std::uint32_t>(log.txs.size()));
        if (inserted) {
            log.txs.push_back(TxId{nonce});
            log.first_spy.emplace_back();
        }
        ObservationTuple t;
        t.tx = it->second;
        t.virtual_exit = parse_number<int>(f[4], "virtual") != 0;
        t.spy = t.virtual_exit ? kVirtualSpy : parse_number<NodeId>(f[1], "spy");
        t.sender = parse_number<NodeId>(f[2], "sender");
        t.time = parse_number<double>(f[3], "time");
        log.full.push_back(t);
        auto& first = log.first_spy[t.tx];
        if (!first || t.time < first->time) first = t;
    }
    return log;
}

// ---------------------------------------------------------------------------
// Posteriors

void write_posterior_csv(std::ostream& out, const PosteriorModel& model) {
    out << "node,tx,weight\n";
    for (std::size_t x = 0; x < model.tx_count(); ++x)
        for (std::size_t v = 0; v < model.node_count(); ++v)
            if (model.at(x, v) != 0.0)
                out << model.nodes()[v] << ',' << model.txs()[x].nonce << ','
                    << format_double(model.at(x, v)) << '\n';
}

PosteriorModel read_posterior_csv(std::istream& in, std::vector<NodeId> nodes,
                                  std::vector<TxId> txs) {
    std::string line;
    if (!next_line(in, line)) throw FormatError("empty posterior file");
    expect_header(line, {"node", "tx", "weight"});
    std::map<std::uint64_t, std::size_t> tx_index;
    for (std::size_t i = 0; i < txs.size(); ++i) tx_index[txs[i].nonce] = i;
    PosteriorModel model(std::move(nodes), std::move(txs));
    while (next_line(in, line)) {
        const auto f = row_fields(line, 3);
        const auto node = parse_number<NodeId>(f[0], "node");
        const auto nonce = parse_number<std::uint64_t>(f[1], "tx");
        const auto idx = model.index_of(node);
        const auto it = tx_index.find(nonce);
        if (!idx) throw FormatError("posterior names unknown node " + f[0]);
        if (it == tx_index.end()) throw FormatError("posterior names unknown tx " + f[1]);
        model.at(it->second, *idx) = parse_number<double>(f[2], "weight");
    }
    model.validate();
    return model;
}

// ---------------------------------------------------------------------------
// Detection points and bounds

namespace {
const std::vector<std::string> kPointColumns = {"protocol", "topology", "n", "p", "q", "trials",
                                               "recall", "recall_se", "precision", "precision_se"};
const std::vector<std::string> kBoundColumns = {"bound_name", "direction", "p", "n", "d", "value"};
}  // namespace

void write_points_csv(std::ostream& out, const std::vector<DetectionPoint>& points) {
    for (std::size_t i = 0; i < kPointColumns.size(); ++i)
        out << (i ? "," : "") << kPointColumns[i];
    out << '\n';
    for (const auto& pt : points) {
        out << pt.protocol << ',' << pt.topology << ',' << pt.n << ',' << format_double(pt.p) << ','
            << format_double(pt.q) << ',' << pt.trials << ',' << format_double(pt.recall) << ','
            << format_double(pt.recall_se) << ',' << format_double(pt.precision) << ','
            << format_double(pt.precision_se) << '\n';
    }
}

std::vector<DetectionPoint> read_points_csv(std::istream& in) {
    std::string line;
    if (!next_line(in, line)) throw FormatError("empty points file");
    expect_header(line, kPointColumns);
    std::vector<DetectionPoint> points;
    while (next_line(in, line)) {
        const auto f = row_fields(line, kPointColumns.size());
        DetectionPoint pt;
        pt.protocol = f[0];
        pt.topology = f[1];
        pt.n = parse_number<std::size_t>(f[2], "n");
        pt.p = parse_number<double>(f[3], "p");
        pt.q = parse_number<double>(f[4], "q");
        pt.trials = parse_number<std::size_t>(f[5], "trials");
        pt.recall = parse_number<double>(f[6], "recall");
        pt.recall_se = parse_number<double>(f[7], "recall_se");
        pt.precision = parse_number<double>(f[8], "precision");
        pt.precision_se = parse_number<double>(f[9], "precision_se");
        points.push_back(pt);
    }
    return points;
}

std::vector<BoundRow> bound_rows(const BoundTable& table) {
    std::vector<BoundRow> rows;
    for (const auto& e : table.entries)
        if (e.value)
            rows.push_back({e.name, direction_name(e.direction), table.p, table.n, table.d, *e.value});
    return rows;
}

void write_bounds_csv(std::ostream& out, const std::vector<BoundRow>& rows) {
    for (std::size_t i = 0; i < kBoundColumns.size(); ++i)
        out << (i ? "," : "") << kBoundColumns[i];
    out << '\n';
    for (const auto& r : rows)
        out << r.name << ',' << r.direction << ',' << format_double(r.p) << ',' << r.n << ','
            << r.d << ',' << format_double(r.value) << '\n';
}

std::vector<BoundRow> read_bounds_csv(std::istream& in) {
    std::string line;
    if (!next_line(in, line)) throw FormatError("empty bounds file");
    expect_header(line, kBoundColumns);
    std::vector<BoundRow> rows;
    while (next_line(in, line)) {
        const auto f = row_fields(line, kBoundColumns.size());
        rows.push_back({f[0], f[1], parse_number<double>(f[2], "p"),
                        parse_number<std::size_t>(f[3], "n"), parse_number<std::size_t>(f[4], "d"),
                        parse_number<double>(f[5], "value")});
    }
    return rows;
}

}  // namespace anonsim
