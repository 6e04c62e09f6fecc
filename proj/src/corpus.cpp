#include "modlog/bench.hpp"

#include <sstream>

#include "modlog/flatten.hpp"
#include "modlog/parser.hpp"

#include "corpus_data.h"

namespace modlog {

namespace {

std::vector<std::string> id_lines(std::string_view text) {
    std::vector<std::string> out;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
            line.pop_back();
        size_t at = line.find_first_not_of(' ');
        if (at != std::string::npos) out.push_back(line.substr(at));
    }
    return out;
}

}  // namespace

const std::vector<CorpusLibrary>& corpus() {
    static const std::vector<CorpusLibrary> libs = {
        {"bt", corpus_data::bt_mpl, id_lines(corpus_data::bt_discharge)},
        {"avl", corpus_data::avl_mpl, id_lines(corpus_data::avl_discharge)},
        {"heap", corpus_data::heap_mpl, id_lines(corpus_data::heap_discharge)},
    };
    return libs;
}

const CorpusLibrary& corpus_library(const std::string& name) {
    for (const CorpusLibrary& lib : corpus())
        if (lib.name == name) return lib;
    throw LoadError(LoadErrorKind::ParseError,
                    "unknown corpus library: " + name, name);
}

std::set<uint32_t> discharge_slots(
    const FlatProgram& p, const std::vector<std::string>& ids,
    const std::map<std::string, std::string>* rename) {
    std::set<std::string> wanted(ids.begin(), ids.end());
    std::set<uint32_t> slots;
    for (uint32_t slot = 0; slot < p.conditions.size(); ++slot) {
        std::string origin = p.conditions[slot].id;
        if (rename) {
            auto r = rename->find(origin);
            if (r != rename->end()) origin = r->second;
        }
        if (wanted.contains(origin)) slots.insert(slot);
    }
    return slots;
}

CorpusPrograms load_corpus_library(const std::string& name) {
    const CorpusLibrary& lib = corpus_library(name);
    CorpusPrograms out;
    out.module = parse_module(lib.source, lib.name + ".mpl");
    out.program = flatten({out.module});
    out.shallow = shallow_flatten({out.module});
    out.discharged = discharge_slots(out.program, lib.discharge);
    out.shallow_discharged = discharge_slots(
        out.shallow.program, lib.discharge, &out.shallow.condition_rename);
    return out;
}

}  // namespace modlog
