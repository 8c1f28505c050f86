#pragma once

namespace vesselgen::mc {

// Classic marching-cubes lookup tables (Lorensen/Cline via Bourke).
// Corner numbering: 0:(0,0,0) 1:(1,0,0) 2:(1,0,1) 3:(0,0,1)
//                   4:(0,1,0) 5:(1,1,0) 6:(1,1,1) 7:(0,1,1)
// Edge e connects edge_corners[e][0] -- edge_corners[e][1].
extern const int edge_table[256];
extern const int tri_table[256][16];
extern const int edge_corners[12][2];
extern const int corner_offset[8][3];

} // namespace vesselgen::mc
