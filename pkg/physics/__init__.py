# fracwave physics package
