# fracwave services package
