#include "mome/archive.hpp"

#include "mome/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <istream>
#include <ostream>

namespace mome {

MoqdArchive::MoqdArchive(std::shared_ptr<const CvtTessellation> tessellation, std::size_t front_capacity,
                         FrontPolicy policy, RandomStream eviction_rng)
    : tessellation_(std::move(tessellation)), capacity_(front_capacity), eviction_rng_(eviction_rng)
{
    if (!tessellation_) throw InvalidArgument("MoqdArchive needs a tessellation");
    fronts_.assign(tessellation_->num_cells(), ParetoFront(front_capacity, policy));
}

auto MoqdArchive::insert(std::span<const Solution> batch) -> std::vector<CellInsertion>
{
    std::vector<CellInsertion> out;
    out.reserve(batch.size());
    for (const auto& s : batch) {
        const auto cell = tessellation_->cell_index(s.descriptor);
        out.push_back({cell, fronts_[cell].insert(s, eviction_rng_)});
    }
    return out;
}

auto MoqdArchive::sample(std::size_t count, RandomStream& rng) const -> std::vector<Solution>
{
    std::vector<std::size_t> occupied;
    for (std::size_t i = 0; i < fronts_.size(); ++i) {
        if (!fronts_[i].empty()) occupied.push_back(i);
    }
    if (occupied.empty()) throw EmptyArchive();

    std::vector<Solution> out;
    out.reserve(count);
    for (std::size_t n = 0; n < count; ++n) {
        const auto& members = fronts_[occupied[rng.index(occupied.size())]].members();
        out.push_back(members[rng.index(members.size())]);
    }
    return out;
}

auto MoqdArchive::coverage() const -> std::size_t
{
    return static_cast<std::size_t>(
        std::count_if(fronts_.begin(), fronts_.end(), [](const ParetoFront& f) { return !f.empty(); }));
}

auto MoqdArchive::total_solutions() const -> std::size_t
{
    std::size_t n = 0;
    for (const auto& f : fronts_) n += f.size();
    return n;
}

auto MoqdArchive::all_solutions() const -> std::vector<Solution>
{
    std::vector<Solution> out;
    out.reserve(total_solutions());
    for (const auto& f : fronts_) out.insert(out.end(), f.members().begin(), f.members().end());
    return out;
}

auto MoqdArchive::cells_consistent() const -> bool
{
    for (std::size_t i = 0; i < fronts_.size(); ++i) {
        for (const auto& s : fronts_[i].members()) {
            if (tessellation_->cell_index(s.descriptor) != i) return false;
        }
    }
    return true;
}

auto passive_mirror_insert(MoqdArchive& passive, std::span<const Solution> batch) -> std::vector<CellInsertion>
{
    return passive.insert(batch);
}

ScalarArchive::ScalarArchive(std::shared_ptr<const CvtTessellation> tessellation)
    : tessellation_(std::move(tessellation))
{
    if (!tessellation_) throw InvalidArgument("ScalarArchive needs a tessellation");
    slots_.resize(tessellation_->num_cells());
    scores_.resize(tessellation_->num_cells());
}

auto ScalarArchive::insert(std::span<const Solution> batch) -> std::vector<ScalarInsertion>
{
    std::vector<ScalarInsertion> out;
    out.reserve(batch.size());
    for (const auto& s : batch) {
        const auto cell = tessellation_->cell_index(s.descriptor);
        const auto score = s.fitness_sum();
        ScalarInsertion r{cell, false, std::nullopt};
        auto& slot = slots_[cell];
        if (!slot) {
            slot = s;
            scores_[cell] = score;
            occupied_.push_back(cell);
            r.added = true;
        } else if (score > scores_[cell]) {
            r.replaced = slot->id;
            slot = s;
            scores_[cell] = score;
            r.added = true;
        }
        out.push_back(std::move(r));
    }
    return out;
}

auto ScalarArchive::sample(std::size_t count, RandomStream& rng) const -> std::vector<Solution>
{
    if (occupied_.empty()) throw EmptyArchive();
    std::vector<Solution> out;
    out.reserve(count);
    for (std::size_t n = 0; n < count; ++n) out.push_back(*slots_[occupied_[rng.index(occupied_.size())]]);
    return out;
}

auto ScalarArchive::cell_fitness(std::size_t cell) const -> std::optional<double>
{
    if (!slots_.at(cell)) return std::nullopt;
    return scores_[cell];
}

auto ScalarArchive::cells_consistent() const -> bool
{
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        if (slots_[i] && tessellation_->cell_index(slots_[i]->descriptor) != i) return false;
    }
    return true;
}

auto write_snapshot(std::ostream& os, const MoqdArchive& archive, const std::string& header_json,
                    const SnapshotOptions& options) -> void
{
    auto header = header_json.empty() ? nlohmann::json::object() : nlohmann::json::parse(header_json);
    header["record"] = "header";
    os << header.dump() << '\n';
    for (std::size_t cell = 0; cell < archive.num_cells(); ++cell) {
        for (const auto& s : archive.front(cell).members()) {
            nlohmann::json rec;
            rec["cell_index"] = cell;
            rec["solution_id"] = s.id;
            rec["fitness"] = s.fitness.values();
            rec["descriptor"] = s.descriptor.values();
            if (options.include_genotype) rec["genotype"] = s.genotype.values();
            os << rec.dump() << '\n';
        }
    }
}

auto read_snapshot(std::istream& is) -> std::vector<SnapshotRecord>
{
    std::vector<SnapshotRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            if (j.contains("record") && j["record"] == "header") continue;
            SnapshotRecord r;
            r.cell_index = j.at("cell_index").get<std::size_t>();
            r.solution_id = j.at("solution_id").get<SolutionId>();
            r.fitness = FitnessVector(j.at("fitness").get<std::vector<double>>());
            r.descriptor = DescriptorVector(j.at("descriptor").get<std::vector<double>>());
            if (j.contains("genotype")) r.genotype = Genotype(j["genotype"].get<std::vector<double>>());
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw IoError("snapshot line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

} // namespace mome
