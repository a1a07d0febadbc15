#include <hipplan/catalog_io.hpp>
#include <hipplan/error.hpp>
#include <hipplan/text.hpp>

#include <fmt/format.h>

#include <fstream>
#include <map>
#include <sstream>

namespace hipplan::sizing {

namespace {

using K = CatalogViolation::Kind;

struct Token {
    std::string text;
    std::size_t line;
};

std::vector<Token> tokenize(std::istream& in) {
    std::vector<Token> out;
    std::string raw;
    for (std::size_t line = 1; std::getline(in, raw); ++line) {
        for (auto& tok : text::split_ws(text::strip_comment(raw))) {
            out.push_back({std::move(tok), line});
        }
    }
    return out;
}

struct RawOutline {
    std::size_t line;
    std::vector<geometry::PointPx> vertices;
};

std::map<std::string, RawOutline> parse_outlines(std::istream& in, const std::string& source,
                                                 std::vector<CatalogViolation>& violations) {
    std::map<std::string, RawOutline> out;
    const auto tokens = tokenize(in);
    std::size_t i = 0;
    while (i < tokens.size()) {
        const Token& id = tokens[i++];
        if (i >= tokens.size()) {
            violations.push_back({K::Syntax, source, id.line,
                                  "outline '" + id.text + "': missing vertex count"});
            break;
        }
        const Token& count_tok = tokens[i++];
        auto count = text::parse_int(count_tok.text);
        if (!count || *count < 0) {
            violations.push_back({K::Syntax, source, count_tok.line,
                                  "outline '" + id.text + "': bad vertex count '" +
                                      count_tok.text + "'"});
            break;
        }
        RawOutline raw{id.line, {}};
        bool good = true;
        for (int v = 0; v < *count && good; ++v) {
            if (i + 1 >= tokens.size()) {
                violations.push_back({K::Syntax, source, tokens.back().line,
                                      "outline '" + id.text + "': expected " +
                                          std::to_string(*count) + " vertices, file ends after " +
                                          std::to_string(v)});
                return out;
            }
            auto x = text::parse_double(tokens[i].text);
            auto y = text::parse_double(tokens[i + 1].text);
            if (!x || !y) {
                violations.push_back({K::Syntax, source, tokens[i].line,
                                      "outline '" + id.text + "': bad coordinate '" +
                                          tokens[x ? i + 1 : i].text + "'"});
                good = false;
                break;
            }
            raw.vertices.push_back({*x, *y});
            i += 2;
        }
        if (!good) break;
        if (out.contains(id.text)) {
            violations.push_back({K::Duplicate, source, id.line,
                                  "outline '" + id.text + "' defined twice"});
            continue;
        }
        out.emplace(id.text, std::move(raw));
    }
    return out;
}

std::ifstream open_or_throw(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + p.string() + "'");
    return in;
}

struct Parsed {
    CatalogCheckReport report;
    std::vector<ImplantSpec> entries;
};

Parsed parse_catalog(const std::filesystem::path& catalog_path) {
    Parsed parsed;
    auto& report = parsed.report;
    report.catalog_path = catalog_path;
    report.outlines_path = outlines_path_for(catalog_path);
    const std::string cat_src = catalog_path.string();
    const std::string out_src = report.outlines_path.string();

    auto cat_in = open_or_throw(catalog_path);
    auto out_in = open_or_throw(report.outlines_path);

    std::vector<CatalogViolation> outline_violations;
    const auto outlines = parse_outlines(out_in, out_src, outline_violations);

    std::vector<std::size_t> lines;
    std::map<std::string, geometry::Outline> validated;
    std::string raw;
    for (std::size_t line = 1; std::getline(cat_in, raw); ++line) {
        const auto tokens = text::split_ws(text::strip_comment(raw));
        if (tokens.empty()) continue;
        if (tokens.size() != 4) {
            report.violations.push_back(
                {K::Syntax, cat_src, line,
                 "expected 'brand side size_mm outline_id', got " +
                     std::to_string(tokens.size()) + " fields"});
            continue;
        }
        auto side = parse_side(tokens[1]);
        if (!side) {
            report.violations.push_back(
                {K::Syntax, cat_src, line, "side must be 'left' or 'right', got '" + tokens[1] + "'"});
            continue;
        }
        auto size = text::parse_int(tokens[2]);
        if (!size) {
            report.violations.push_back(
                {K::Syntax, cat_src, line, "size_mm must be an integer, got '" + tokens[2] + "'"});
            continue;
        }
        const std::string& outline_id = tokens[3];
        auto it = outlines.find(outline_id);
        if (it == outlines.end()) {
            report.violations.push_back(
                {K::Outline, cat_src, line, "outline '" + outline_id + "' not found in " + out_src});
            continue;
        }
        auto v = validated.find(outline_id);
        if (v == validated.end()) {
            try {
                v = validated.emplace(outline_id, geometry::Outline::make(it->second.vertices)).first;
            } catch (const Error& e) {
                report.violations.push_back({K::Outline, out_src, it->second.line,
                                             "outline '" + outline_id + "': " + e.what()});
                continue;
            }
        }
        parsed.entries.push_back({tokens[0], *side, *size, outline_id, v->second});
        lines.push_back(line);
    }
    report.entry_count = parsed.entries.size();

    auto semantic = validate_entries(parsed.entries, lines, cat_src);
    report.violations.insert(report.violations.end(), semantic.begin(), semantic.end());
    report.violations.insert(report.violations.end(), outline_violations.begin(),
                             outline_violations.end());
    return parsed;
}

}  // namespace

std::filesystem::path outlines_path_for(const std::filesystem::path& catalog_path) {
    auto p = catalog_path;
    p.replace_extension(".outlines");
    return p;
}

CatalogCheckReport check_catalog_file(const std::filesystem::path& catalog_path) {
    return parse_catalog(catalog_path).report;
}

ImplantCatalog load_catalog(const std::filesystem::path& catalog_path) {
    auto parsed = parse_catalog(catalog_path);
    if (!parsed.report.ok()) {
        const auto& v = parsed.report.violations.front();
        throw ParseError(v.source, v.line, std::string(to_string(v.kind)) + ": " + v.message);
    }
    return ImplantCatalog::make(std::move(parsed.entries));
}

void write_catalog(const ImplantCatalog& catalog, const std::filesystem::path& catalog_path) {
    std::ostringstream cat;
    std::ostringstream outl;
    cat << "# brand side size_mm outline_id\n";
    outl << "# outline_id vertex_count then x y pairs in template millimeters\n";
    std::map<std::string, bool> written;
    for (const auto& e : catalog.entries()) {
        cat << e.brand << ' ' << to_string(e.side) << ' ' << e.size_mm << ' ' << e.outline_id
            << '\n';
        if (written[e.outline_id]) continue;
        written[e.outline_id] = true;
        outl << e.outline_id << ' ' << e.outline.size() << '\n';
        for (const auto& p : e.outline.vertices()) {
            outl << "  " << fmt::format("{:.6f} {:.6f}", p.x + 0.0, p.y + 0.0) << '\n';
        }
    }
    for (const auto& [path, body] :
         {std::pair{catalog_path, cat.str()}, std::pair{outlines_path_for(catalog_path), outl.str()}}) {
        std::ofstream f(path, std::ios::binary);
        if (!f || !(f << body)) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
    }
}

}  // namespace hipplan::sizing
