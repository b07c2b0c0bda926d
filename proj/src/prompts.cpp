#include "reviewkit/prompts.hpp"

#include <fstream>
#include <sstream>

#include "reviewkit/error.hpp"
#include "templates_embedded.hpp"

namespace reviewkit {

const PromptTemplates& PromptTemplates::builtin() {
    static const PromptTemplates templates{
        std::string(embedded::query_generation),
        std::string(embedded::retrieval_system),
        std::string(embedded::review_generation),
        std::string(embedded::genrm),
        std::string(embedded::retrieval_factual_accuracy),
        std::string(embedded::retrieval_evidence_quality),
        std::string(embedded::retrieval_clarity_coherence),
        std::string(embedded::dimension_scoring),
        std::string(embedded::reference_synthesis),
    };
    return templates;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
    auto read = [&](const char* name) {
        const auto path = dir / (std::string(name) + ".txt");
        std::ifstream in(path, std::ios::binary);
        if (!in) fail(ErrorKind::Io, "cannot read template " + path.string());
        std::ostringstream buffer;
        buffer << in.rdbuf();
        return buffer.str();
    };
    return PromptTemplates{
        read("query_generation"),
        read("retrieval_system"),
        read("review_generation"),
        read("genrm"),
        read("retrieval_factual_accuracy"),
        read("retrieval_evidence_quality"),
        read("retrieval_clarity_coherence"),
        read("dimension_scoring"),
        read("reference_synthesis"),
    };
}

std::string render(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            const auto close = tmpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                const auto it = vars.find(std::string(tmpl.substr(i + 1, close - i - 1)));
                if (it != vars.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(tmpl[i++]);
    }
    return out;
}

std::string render_review_prompt(std::string_view paper, const PromptTemplates& templates) {
    return render(templates.review_generation, {{"paper", std::string(paper)}});
}

} // namespace reviewkit
