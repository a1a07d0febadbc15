#include "cli.hpp"

#include <hipplan/catalog_io.hpp>
#include <hipplan/error.hpp>
#include <hipplan/evaluation.hpp>
#include <hipplan/service.hpp>
#include <hipplan/sizing.hpp>
#include <hipplan/text.hpp>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>

namespace hipplan::cli {

namespace {

constexpr std::string_view kMeasurementHeader = "label,ax,ay,bx,by,mm_per_px";

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
    return in;
}

std::string pad(const std::string& s, std::size_t width) {
    return s + std::string(width > s.size() ? width - s.size() : 0, ' ');
}

struct SizedRow {
    std::string label;
    std::string measured;
    std::string size;
};

int run_size(const std::string& input, const std::string& catalog_path, const std::string& format,
             std::ostream& out) {
    const auto catalog = sizing::load_catalog(catalog_path);
    auto in = open_input(input);
    const auto rows = parse_measurements(in, input);

    // Size everything first so a bad row produces no partial table.
    std::vector<SizedRow> sized;
    for (const auto& row : rows) {
        sizing::SizingResult r;
        try {
            r = sizing::measure_and_size(row.segment, geometry::Calibration::make(row.mm_per_px), catalog);
        } catch (const Error& e) {
            throw Error(e.code(), input + ": line " + std::to_string(row.line) + ": " + e.what());
        }
        sized.push_back({row.label, fmt::format("{:.2f}", r.measured_mm),
                         r.accepted() ? std::to_string(*r.snapped_size_mm)
                                      : "REJECTED(" + std::string(sizing::to_string(*r.rejected_reason)) + ")"});
    }

    if (format == "csv") {
        out << "label,measured_mm,size\n";
        for (const auto& r : sized) out << r.label << ',' << r.measured << ',' << r.size << '\n';
        return 0;
    }
    std::size_t w_label = std::string_view("label").size();
    std::size_t w_measured = std::string_view("measured_mm").size();
    for (const auto& r : sized) {
        w_label = std::max(w_label, r.label.size());
        w_measured = std::max(w_measured, r.measured.size());
    }
    out << pad("label", w_label) << "  " << pad("measured_mm", w_measured) << "  size\n";
    for (const auto& r : sized) {
        out << pad(r.label, w_label) << "  " << pad(r.measured, w_measured) << "  " << r.size << '\n';
    }
    return 0;
}

int run_compare(const std::string& pairs_path, int tolerance, const std::string& format,
                std::ostream& out) {
    const auto pairs = evaluation::load_pairs(pairs_path);
    const auto report = evaluation::compare(pairs, tolerance);
    if (format == "csv") {
        evaluation::write_csv_report(out, report);
    } else {
        evaluation::write_text_report(out, report);
    }
    return 0;
}

int run_catalog_check(const std::string& path, std::ostream& out) {
    const auto report = sizing::check_catalog_file(path);
    if (report.ok()) {
        const auto catalog = sizing::load_catalog(path);
        out << "OK " << path << ": " << report.entry_count << " entries, brand " << catalog.brand()
            << ", sizes " << catalog.min_size() << "-" << catalog.max_size() << " mm\n";
        return 0;
    }
    for (const auto& v : report.violations) {
        out << v.source;
        if (v.line > 0) out << ":" << v.line;
        out << ": " << sizing::to_string(v.kind) << ": " << v.message << '\n';
    }
    out << "FAILED " << path << ": " << report.violations.size() << " violation"
        << (report.violations.size() == 1 ? "" : "s") << '\n';
    return 1;
}

std::atomic<service::HttpServer*> g_server{nullptr};

extern "C" void on_signal(int) {
    if (auto* s = g_server.load()) s->stop();
}

int run_serve(const std::string& catalog_path, const std::string& store_dir, const std::string& host,
              int port, const std::optional<std::string>& static_dir, std::ostream& out,
              std::ostream& err) {
    auto catalog = std::make_shared<const sizing::ImplantCatalog>(sizing::load_catalog(catalog_path));
    auto store = std::make_shared<planning::PlanStore>(store_dir, catalog);
    service::Api api(catalog, store);
    std::optional<std::filesystem::path> static_path;
    if (static_dir) static_path = *static_dir;
    service::HttpServer server(api, static_path);
    const int bound = server.bind(host, port);
    if (bound < 0) {
        err << "error: cannot bind " << host << ":" << port << '\n';
        return 1;
    }
    out << "listening on http://" << host << ":" << bound << std::endl;
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.serve();
    g_server = nullptr;
    return 0;
}

}  // namespace

std::vector<MeasurementRow> parse_measurements(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line) || text::trim(line) != kMeasurementHeader) {
        throw ParseError(source, 1, "expected header '" + std::string(kMeasurementHeader) + "'");
    }
    static constexpr const char* kColumns[] = {"ax", "ay", "bx", "by", "mm_per_px"};
    std::vector<MeasurementRow> rows;
    for (std::size_t n = 2; std::getline(in, line); ++n) {
        if (text::trim(line).empty()) continue;
        const auto cells = text::split_csv(line);
        if (cells.size() != 6) {
            throw ParseError(source, n, "expected 6 fields, got " + std::to_string(cells.size()));
        }
        double v[5];
        for (int i = 0; i < 5; ++i) {
            auto d = text::parse_double(cells[static_cast<std::size_t>(i) + 1]);
            if (!d) {
                throw ParseError(source, n, std::string(kColumns[i]) + ": not a number: '" +
                                                cells[static_cast<std::size_t>(i) + 1] + "'");
            }
            v[i] = *d;
        }
        if (v[4] <= 0.0) throw ParseError(source, n, "mm_per_px must be > 0");
        rows.push_back({n, cells[0], {{v[0], v[1]}, {v[2], v[3]}}, v[4]});
    }
    return rows;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Acetabular cup templating: sizing, evaluation and planning service"};
    app.name("hipplan");
    app.require_subcommand(1);

    std::string input, catalog, format = "text";
    auto* size = app.add_subcommand("size", "Size diameter measurements from a CSV file");
    size->add_option("--input", input, "CSV with header label,ax,ay,bx,by,mm_per_px")->required();
    size->add_option("--catalog", catalog, "Implant catalog file")->required();
    size->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "csv"}));

    std::string pairs;
    int tolerance = 2;
    auto* compare = app.add_subcommand("compare", "Observational vs digital agreement report");
    compare->add_option("--pairs", pairs, "CSV with header label,observational_mm,digital_mm")->required();
    compare->add_option("--tolerance", tolerance, "Clinical tolerance in mm")->check(CLI::NonNegativeNumber);
    compare->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "csv"}));

    std::string check_path;
    auto* check = app.add_subcommand("catalog-check", "Validate an implant catalog");
    check->add_option("path", check_path, "Catalog file")->required();

    std::string store = "plans", host = "127.0.0.1";
    int port = 8080;
    std::optional<std::string> static_dir;
    auto* serve = app.add_subcommand("serve", "Run the planning HTTP API");
    serve->add_option("--catalog", catalog, "Implant catalog file")->required();
    serve->add_option("--store", store, "Plan directory");
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--port", port, "Port (0 picks a free one)");
    serve->add_option("--static", static_dir, "Directory served under /ui/");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    try {
        if (*size) return run_size(input, catalog, format, out);
        if (*compare) return run_compare(pairs, tolerance, format, out);
        if (*check) return run_catalog_check(check_path, out);
        if (*serve) return run_serve(catalog, store, host, port, static_dir, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("hipplan");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace hipplan::cli
