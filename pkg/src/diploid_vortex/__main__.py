from diploid_vortex.cli.main import main

main()
