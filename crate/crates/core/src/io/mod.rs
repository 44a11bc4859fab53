//! File formats: field, trajectory and path CSV tables, and PGM rasters.
//!
//! Field tables have one row per cell in row-major order from the top row,
//! with cell-centre coordinates in mm followed by the values:
//!
//! | file | columns |
//! |------|---------|
//! | potential | `x_mm,y_mm,phi_V` |
//! | Joule power | `x_mm,y_mm,joule_W_m3` |
//! | current density | `x_mm,y_mm,jx_A_m2,jy_A_m2` |
//! | grad \|J\| | `x_mm,y_mm,gx_A_m3,gy_A_m3` |
//! | trajectory | `t_s,x_mm,y_mm,speed_mm_s,force_mag` |
//! | oracle path | `step,cell_x,cell_y,x_mm,y_mm` |

mod csv;
mod image;

pub use self::csv::{
    read_field_csv, scalar_column, vector_columns, write_path_csv, write_scalar_csv,
    write_trajectory_csv, write_vector_csv, FieldTable,
};
pub use self::image::{
    render_field, FieldRef, Normalization, Overlay, Raster, RenderOptions, RenderStyle,
};
