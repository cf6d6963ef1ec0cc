pub mod align_oracle;
pub mod dense;
