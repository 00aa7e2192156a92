#ifndef COHART_MASK_HPP
#define COHART_MASK_HPP

#include <algorithm>
#include <utility>
#include <vector>

#include "cohart/basis.hpp"
#include "cohart/errors.hpp"
#include "cohart/geometry.hpp"

namespace cohart {

// Binary Hartmann mask on a 1-D DMD grid: the set of open mirrors must
// form one or two contiguous runs.
struct MaskPattern {
    std::vector<int> open_mirrors; // sorted unique indices
    int grid_size = 0;

    static MaskPattern from_runs(const std::vector<std::pair<int, int>>& runs, int grid_size) {
        MaskPattern m;
        m.grid_size = grid_size;
        for (const auto& [start, length] : runs)
            for (int i = 0; i < length; ++i) m.open_mirrors.push_back(start + i);
        std::sort(m.open_mirrors.begin(), m.open_mirrors.end());
        m.validate();
        return m;
    }

    std::vector<std::pair<int, int>> runs() const {
        std::vector<std::pair<int, int>> out; // (start, length)
        for (size_t i = 0; i < open_mirrors.size();) {
            size_t j = i + 1;
            while (j < open_mirrors.size() && open_mirrors[j] == open_mirrors[j - 1] + 1) ++j;
            out.emplace_back(open_mirrors[i], static_cast<int>(j - i));
            i = j;
        }
        return out;
    }

    void validate() const {
        if (grid_size <= 0) throw DomainError("mask grid_size must be positive");
        for (size_t i = 0; i < open_mirrors.size(); ++i) {
            if (open_mirrors[i] < 0 || open_mirrors[i] >= grid_size)
                throw DomainError("mask mirror index out of grid range");
            if (i > 0 && open_mirrors[i] == open_mirrors[i - 1])
                throw DomainError("duplicate mirror index in mask");
        }
    }
};

// Mirror j is centered at (j + 0.5 - grid_size/2) * pitch, so the grid
// is centered on the DMD origin. Each contiguous run of n open mirrors
// becomes one aperture of width n * pitch at the run midpoint.
inline std::vector<Aperture> apertures_from_mask(const MaskPattern& mask,
                                                 const SensorGeometry& geometry) {
    mask.validate();
    const auto runs = mask.runs();
    if (runs.size() > 2)
        throw DomainError("unsupported mask: more than two contiguous runs");
    std::vector<Aperture> apertures;
    for (const auto& [start, length] : runs) {
        const double center =
            (start + 0.5 * length - 0.5 * mask.grid_size) * geometry.mirror_pitch;
        apertures.emplace_back(center, length * geometry.mirror_pitch);
    }
    return apertures;
}

} // namespace cohart

#endif
