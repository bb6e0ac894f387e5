#include <pdfrac/pdfrac.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <string>

int main( int argc, char** argv )
{
    CLI::App app{ "Antiplane peridynamic fracture simulator" };
    std::string subcommand;
    std::string config_path;
    std::string out_dir;
    int threads = 1;
    std::size_t stride = 0;
    pdfrac::DispatchOptions options;

    app.add_option( "subcommand", subcommand,
                    "run | calibrate | nucleate | sweep | wave | gamma" )
        ->required()
        ->check( CLI::IsMember( { "run", "calibrate", "nucleate", "sweep",
                                  "wave", "gamma" } ) );
    app.add_option( "--config", config_path, "INI configuration file" )
        ->required();
    app.add_option( "--out", out_dir, "output directory (overrides [output] dir)" );
    app.add_option( "--threads", threads, "worker threads" )
        ->check( CLI::PositiveNumber );
    app.add_option( "--stride", stride,
                    "observer stride in steps (overrides [time] stride)" )
        ->check( CLI::PositiveNumber );
    app.add_flag( "--grid-summary", options.grid_summary,
                  "print grid and neighbourhood statistics" );

    try
    {
        app.parse( argc, argv );
    }
    catch ( const CLI::ParseError& e )
    {
        const int code = app.exit( e );
        return code == 0 ? 0 : pdfrac::exit_validation;
    }

    pdfrac::RunConfig cfg;
    try
    {
        pdfrac::set_num_threads( threads );
        cfg = pdfrac::parse_config( config_path );
    }
    catch ( const std::exception& e )
    {
        std::cerr << "error: " << e.what() << "\n";
        return pdfrac::exit_validation;
    }
    if ( !out_dir.empty() )
        cfg.out_dir = out_dir;
    if ( stride > 0 )
        cfg.stride = stride;
    return pdfrac::dispatch( subcommand, cfg, std::cout, std::cerr, options );
}
