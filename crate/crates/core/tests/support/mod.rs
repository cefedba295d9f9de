pub mod mms;
