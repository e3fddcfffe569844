# fracwave scenarios package
