//! File formats: flat binary vectors and ground truth, and the index file.

mod bin;
mod index_file;

pub use bin::{read_fbin, read_gt, read_ibin, read_u8bin, read_vectors, write_fbin, write_gt, write_ibin};
pub use index_file::{decode_index, encode_index, load_index, save_index, MAGIC, VERSION};
